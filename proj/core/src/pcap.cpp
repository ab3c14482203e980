#include "soar/pcap.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "soar/error.hpp"

namespace soar {
namespace {

constexpr uint32_t kMagicNative = 0xA1B2C3D4;
constexpr uint32_t kMagicSwapped = 0xD4C3B2A1;
constexpr uint32_t kLinkEthernet = 1;
constexpr uint16_t kEthertypeIpv4 = 0x0800;
constexpr size_t kEthHeader = 14;

uint32_t bswap32(uint32_t v) {
  return ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
}
uint16_t bswap16(uint16_t v) { return uint16_t((v << 8) | (v >> 8)); }

uint16_t be16(const uint8_t* p) { return uint16_t((p[0] << 8) | p[1]); }
uint32_t be32(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

struct RawHeader {
  uint32_t magic, ver_zone, sig_snap, network;
};

bool read_exact(std::istream& in, void* buf, size_t n) {
  in.read(reinterpret_cast<char*>(buf), std::streamsize(n));
  return size_t(in.gcount()) == n;
}

void put_u32le(std::string& out, uint32_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 24) & 0xff));
}
void put_u16le(std::string& out, uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
}
void put_u16be(std::string& out, uint16_t v) {
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char(v & 0xff));
}
void put_u32be(std::string& out, uint32_t v) {
  put_u16be(out, uint16_t(v >> 16));
  put_u16be(out, uint16_t(v & 0xffff));
}

uint16_t ip_checksum(const uint8_t* data, size_t len) {
  uint32_t sum = 0;
  for (size_t i = 0; i + 1 < len; i += 2) sum += uint32_t((data[i] << 8) | data[i + 1]);
  if (len & 1) sum += uint32_t(data[len - 1] << 8);
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return uint16_t(~sum);
}

}  // namespace

CaptureResult parse_capture(std::istream& in) {
  uint8_t gh[24];
  if (!read_exact(in, gh, sizeof(gh)))
    throw Error(ErrorCode::UnrecognizedMagic, "capture shorter than global header");

  uint32_t magic;
  std::memcpy(&magic, gh, 4);
  bool swap;
  if (magic == kMagicNative) {
    swap = false;
  } else if (magic == kMagicSwapped) {
    swap = true;
  } else {
    throw Error(ErrorCode::UnrecognizedMagic, "bad capture magic");
  }

  uint32_t network;
  std::memcpy(&network, gh + 20, 4);
  if (swap) network = bswap32(network);
  if (network != kLinkEthernet)
    throw Error(ErrorCode::UnsupportedLinkType, "link type " + std::to_string(network));

  CaptureResult result;
  std::vector<uint8_t> frame;
  double epoch = 0.0;
  bool have_epoch = false;

  for (;;) {
    uint8_t rh[16];
    in.read(reinterpret_cast<char*>(rh), sizeof(rh));
    auto got = size_t(in.gcount());
    if (got == 0) break;  // clean end of stream
    if (got < sizeof(rh)) {
      // truncated trailing record header
      result.total++;
      result.skipped++;
      break;
    }
    uint32_t ts_sec, ts_usec, incl_len, orig_len;
    std::memcpy(&ts_sec, rh, 4);
    std::memcpy(&ts_usec, rh + 4, 4);
    std::memcpy(&incl_len, rh + 8, 4);
    std::memcpy(&orig_len, rh + 12, 4);
    if (swap) {
      ts_sec = bswap32(ts_sec);
      ts_usec = bswap32(ts_usec);
      incl_len = bswap32(incl_len);
      orig_len = bswap32(orig_len);
    }
    result.total++;

    frame.resize(incl_len);
    if (incl_len > 0 && !read_exact(in, frame.data(), incl_len)) {
      // frame shorter than declared caplen: skip and stop, never abort
      result.skipped++;
      break;
    }

    if (incl_len < kEthHeader) {
      result.skipped++;
      continue;
    }
    uint16_t ethertype = be16(frame.data() + 12);
    if (ethertype != kEthertypeIpv4) {
      result.skipped++;  // ARP, IPv6, anything non-IPv4
      continue;
    }

    const uint8_t* ip = frame.data() + kEthHeader;
    size_t avail = incl_len - kEthHeader;
    if (avail < 20 || (ip[0] >> 4) != 4) {
      result.skipped++;
      continue;
    }
    size_t ihl = size_t(ip[0] & 0x0f) * 4;
    if (ihl < 20 || avail < ihl) {
      result.skipped++;
      continue;
    }
    uint16_t ip_total = be16(ip + 2);
    uint8_t ip_proto = ip[9];

    Packet pkt;
    pkt.ts = double(ts_sec) + double(ts_usec) * 1e-6;
    std::memcpy(pkt.eth_dst.b.data(), frame.data(), 6);
    std::memcpy(pkt.eth_src.b.data(), frame.data() + 6, 6);
    pkt.ip_src = Ipv4(be32(ip + 12));
    pkt.ip_dst = Ipv4(be32(ip + 16));
    pkt.length = orig_len;

    size_t l4_off = kEthHeader + ihl;
    // payload region ends at the declared IP total length (ethernet trailer
    // padding is not payload) and never beyond the captured bytes
    size_t ip_end = std::min(size_t(incl_len), kEthHeader + size_t(ip_total));

    switch (ip_proto) {
      case 6: {  // TCP
        pkt.proto = Proto::TCP;
        if (incl_len < l4_off + 20) {
          result.skipped++;
          continue;
        }
        const uint8_t* tcp = frame.data() + l4_off;
        pkt.src_port = be16(tcp);
        pkt.dst_port = be16(tcp + 2);
        pkt.tcp_flags = tcp[13];
        size_t doff = size_t(tcp[12] >> 4) * 4;
        size_t data_off = l4_off + doff;
        if (data_off < ip_end) pkt.payload.assign(frame.data() + data_off, frame.data() + ip_end);
        break;
      }
      case 17: {  // UDP
        pkt.proto = Proto::UDP;
        if (incl_len < l4_off + 8) {
          result.skipped++;
          continue;
        }
        const uint8_t* udp = frame.data() + l4_off;
        pkt.src_port = be16(udp);
        pkt.dst_port = be16(udp + 2);
        size_t data_off = l4_off + 8;
        if (data_off < ip_end) pkt.payload.assign(frame.data() + data_off, frame.data() + ip_end);
        break;
      }
      case 1: {  // ICMP
        pkt.proto = Proto::ICMP;
        break;
      }
      default:
        pkt.proto = Proto::OTHER;
        break;
    }

    if (!have_epoch) {
      epoch = pkt.ts;
      have_epoch = true;
    }
    pkt.ts -= epoch;
    result.packets.push_back(std::move(pkt));
  }
  return result;
}

CaptureResult parse_capture_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return parse_capture(in);
}

void write_capture(std::ostream& out, std::span<const Packet> packets) {
  std::string buf;
  put_u32le(buf, kMagicNative);
  put_u16le(buf, 2);  // version 2.4
  put_u16le(buf, 4);
  put_u32le(buf, 0);       // thiszone
  put_u32le(buf, 0);       // sigfigs
  put_u32le(buf, 65535);   // snaplen
  put_u32le(buf, kLinkEthernet);

  for (const Packet& p : packets) {
    std::string frame;
    frame.reserve(kEthHeader + 40 + p.payload.size());
    frame.append(reinterpret_cast<const char*>(p.eth_dst.b.data()), 6);
    frame.append(reinterpret_cast<const char*>(p.eth_src.b.data()), 6);
    put_u16be(frame, kEthertypeIpv4);

    std::string l4;
    uint8_t ip_proto = 0;
    switch (p.proto) {
      case Proto::TCP: {
        ip_proto = 6;
        put_u16be(l4, p.src_port);
        put_u16be(l4, p.dst_port);
        put_u32be(l4, 0);  // seq
        put_u32be(l4, 0);  // ack
        l4.push_back(char(5 << 4));
        l4.push_back(char(p.tcp_flags.value_or(p.payload.empty() ? kTcpSyn : kTcpPsh | kTcpAck)));
        put_u16be(l4, 64240);  // window
        put_u16be(l4, 0);      // checksum (not verified by the reader)
        put_u16be(l4, 0);      // urgent
        break;
      }
      case Proto::UDP: {
        ip_proto = 17;
        put_u16be(l4, p.src_port);
        put_u16be(l4, p.dst_port);
        put_u16be(l4, uint16_t(8 + p.payload.size()));
        put_u16be(l4, 0);
        break;
      }
      case Proto::ICMP: {
        ip_proto = 1;
        l4.push_back(8);  // echo request
        l4.push_back(0);
        put_u16be(l4, 0);
        put_u32be(l4, 0);
        break;
      }
      case Proto::OTHER: {
        ip_proto = 253;  // experimental
        break;
      }
    }
    l4.append(reinterpret_cast<const char*>(p.payload.data()), p.payload.size());

    std::string ip;
    ip.push_back(char(0x45));
    ip.push_back(0);
    put_u16be(ip, uint16_t(20 + l4.size()));
    put_u16be(ip, 0);  // id
    put_u16be(ip, 0x4000);  // don't fragment
    ip.push_back(64);  // ttl
    ip.push_back(char(ip_proto));
    put_u16be(ip, 0);  // checksum placeholder
    put_u32be(ip, p.ip_src.addr);
    put_u32be(ip, p.ip_dst.addr);
    uint16_t csum = ip_checksum(reinterpret_cast<const uint8_t*>(ip.data()), ip.size());
    ip[10] = char(csum >> 8);
    ip[11] = char(csum & 0xff);

    frame += ip;
    frame += l4;
    // zero-pad up to the declared on-wire length (short-frame padding)
    uint32_t wire_len = std::max<uint32_t>(p.length, uint32_t(frame.size()));
    frame.resize(wire_len, '\0');

    double sec_floor = std::floor(p.ts);
    auto usec = int64_t(std::llround((p.ts - sec_floor) * 1e6));
    auto sec = int64_t(sec_floor);
    if (usec >= 1000000) {
      sec += 1;
      usec -= 1000000;
    }
    put_u32le(buf, uint32_t(sec));
    put_u32le(buf, uint32_t(usec));
    put_u32le(buf, wire_len);
    put_u32le(buf, wire_len);
    buf += frame;
  }
  out.write(buf.data(), std::streamsize(buf.size()));
}

void write_capture_file(const std::filesystem::path& path, std::span<const Packet> packets) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_capture(out, packets);
}

}  // namespace soar
