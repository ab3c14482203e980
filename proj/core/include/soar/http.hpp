#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "soar/packet.hpp"

namespace soar {

/// Splits one parsed segment into an HttpRequest. A segment that does not
/// start with a known request line yields a degenerate request: method and
/// path are "-" and `raw` is preserved so the IDS still sees the bytes.
HttpRequest parse_http_request(std::string raw, double ts, Ipv4 src_ip);

/// Reassembles requests from one in-order TCP direction (payload-bearing
/// packets on an HTTP port). Retransmission and reordering are not handled;
/// scenario traffic is in order and real captures are best-effort.
std::vector<HttpRequest> reassemble_http(std::span<const Packet> packets);

/// Streaming variant used by the engine: one buffer per (src, dst, sport,
/// dport) direction, requests emitted as soon as they look complete.
class HttpAssembler {
 public:
  std::vector<HttpRequest> feed(const Packet& p);
  std::vector<HttpRequest> flush();

 private:
  struct Stream {
    std::string buf;
    double first_ts = 0.0;
    Ipv4 src;
  };
  std::map<std::tuple<uint32_t, uint32_t, uint16_t, uint16_t>, Stream> streams_;
};

}  // namespace soar
