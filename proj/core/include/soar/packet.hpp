#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "soar/ip.hpp"

namespace soar {

enum class Proto : uint8_t { TCP, UDP, ICMP, OTHER };

/// IANA protocol numbers; stable across serializations.
inline constexpr int proto_code(Proto p) {
  switch (p) {
    case Proto::TCP: return 6;
    case Proto::UDP: return 17;
    case Proto::ICMP: return 1;
    case Proto::OTHER: return 0;
  }
  return 0;
}

inline const char* proto_name(Proto p) {
  switch (p) {
    case Proto::TCP: return "TCP";
    case Proto::UDP: return "UDP";
    case Proto::ICMP: return "ICMP";
    case Proto::OTHER: return "OTHER";
  }
  return "OTHER";
}

inline constexpr uint8_t kTcpFin = 0x01;
inline constexpr uint8_t kTcpSyn = 0x02;
inline constexpr uint8_t kTcpRst = 0x04;
inline constexpr uint8_t kTcpPsh = 0x08;
inline constexpr uint8_t kTcpAck = 0x10;

/// One observed L2/L3/L4 unit. `ts` is seconds since the stream epoch (the
/// first packet of a stream defines t=0). Ports are 0 iff proto is ICMP/OTHER.
struct Packet {
  double ts = 0.0;
  Mac eth_src;
  Mac eth_dst;
  Ipv4 ip_src;
  Ipv4 ip_dst;
  Proto proto = Proto::OTHER;
  uint16_t src_port = 0;
  uint16_t dst_port = 0;
  uint32_t length = 0;  // bytes on wire
  std::optional<uint8_t> tcp_flags;  // metadata when the capture provides it
  std::vector<uint8_t> payload;
};

/// One HTTP request as seen by the host-based IDS. `raw` is the byte-for-byte
/// source for all frequency features.
struct HttpRequest {
  double ts = 0.0;
  Ipv4 src_ip;
  std::string method;
  std::string path;
  std::string query;
  std::string body;
  std::string raw;
};

}  // namespace soar
