#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace soar {

/// IPv4 address held in host byte order so arithmetic and ordering work naturally.
struct Ipv4 {
  uint32_t addr = 0;

  constexpr Ipv4() = default;
  constexpr explicit Ipv4(uint32_t a) : addr(a) {}
  constexpr Ipv4(uint8_t a, uint8_t b, uint8_t c, uint8_t d)
      : addr((uint32_t(a) << 24) | (uint32_t(b) << 16) | (uint32_t(c) << 8) | d) {}

  auto operator<=>(const Ipv4&) const = default;

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (addr >> 24) & 0xff, (addr >> 16) & 0xff,
                  (addr >> 8) & 0xff, addr & 0xff);
    return buf;
  }

  static std::optional<Ipv4> parse(std::string_view s) {
    uint32_t parts[4];
    int idx = 0;
    uint64_t cur = 0;
    bool have_digit = false;
    for (char c : s) {
      if (c >= '0' && c <= '9') {
        cur = cur * 10 + uint64_t(c - '0');
        if (cur > 255) return std::nullopt;
        have_digit = true;
      } else if (c == '.') {
        if (!have_digit || idx >= 3) return std::nullopt;
        parts[idx++] = uint32_t(cur);
        cur = 0;
        have_digit = false;
      } else {
        return std::nullopt;
      }
    }
    if (!have_digit || idx != 3) return std::nullopt;
    parts[3] = uint32_t(cur);
    return Ipv4((parts[0] << 24) | (parts[1] << 16) | (parts[2] << 8) | parts[3]);
  }
};

/// 48-bit link-layer address.
struct Mac {
  std::array<uint8_t, 6> b{};

  auto operator<=>(const Mac&) const = default;

  uint64_t key() const {
    uint64_t k = 0;
    for (uint8_t v : b) k = (k << 8) | v;
    return k;
  }

  std::string str() const {
    char buf[18];
    std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", b[0], b[1], b[2], b[3], b[4],
                  b[5]);
    return buf;
  }

  // Locally administered address derived from an IPv4 host; keeps simulated
  // link addresses stable and collision-free per host.
  static Mac from_ip(Ipv4 ip) {
    Mac m;
    m.b = {0x02, 0x00, uint8_t(ip.addr >> 24), uint8_t(ip.addr >> 16), uint8_t(ip.addr >> 8),
           uint8_t(ip.addr)};
    return m;
  }
};

struct Cidr {
  Ipv4 base;
  int prefix = 24;

  bool contains(Ipv4 ip) const {
    if (prefix <= 0) return true;
    uint32_t mask = prefix >= 32 ? 0xffffffffu : ~((1u << (32 - prefix)) - 1);
    return (ip.addr & mask) == (base.addr & mask);
  }

  std::string str() const { return base.str() + "/" + std::to_string(prefix); }

  static std::optional<Cidr> parse(std::string_view s) {
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto ip = Ipv4::parse(s.substr(0, slash));
    if (!ip) return std::nullopt;
    int prefix = 0;
    for (char c : s.substr(slash + 1)) {
      if (c < '0' || c > '9') return std::nullopt;
      prefix = prefix * 10 + (c - '0');
      if (prefix > 32) return std::nullopt;
    }
    return Cidr{*ip, prefix};
  }
};

}  // namespace soar
