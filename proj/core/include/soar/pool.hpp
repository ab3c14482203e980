#pragma once

#include <span>
#include <vector>

#include "soar/ip.hpp"
#include "soar/packet.hpp"

namespace soar {

/// The ordered decoy-IP ladder. Strictly increasing, 2..16 entries, all inside
/// the subnet. Built either from a regular ladder (first + spacing * k) or an
/// explicit list; `spacing()` reports the minimum adjacent host gap, which is
/// what the pre-positioning race depends on.
class ReservedIpPool {
 public:
  static ReservedIpPool from_ladder(Cidr subnet, Ipv4 first, int spacing_hosts, int count);
  static ReservedIpPool from_list(Cidr subnet, std::vector<Ipv4> ips);

  const std::vector<Ipv4>& ips() const { return ips_; }
  const Cidr& subnet() const { return subnet_; }
  int spacing() const { return spacing_; }
  bool contains(Ipv4 ip) const;

  /// Throws ConfigInvalid if any reserved IP falls inside [start, end].
  void check_dhcp_overlap(Ipv4 start, Ipv4 end) const;

 private:
  ReservedIpPool() = default;
  void validate();

  Cidr subnet_;
  std::vector<Ipv4> ips_;
  int spacing_ = 0;
};

/// Membership over an arbitrary ordered ladder; the pool delegates here.
bool ip_in_pool(Ipv4 ip, std::span<const Ipv4> pool_ips);

/// True iff the packet's destination is one of the reserved decoy IPs.
bool is_reserved_target(const Packet& p, const ReservedIpPool& pool);

/// Direction-aware selection of free reserved IPs: drop ip_dst and occupied
/// entries from the ladder (order preserved), then take the first n when
/// ip_dst is the ladder's first element, else the last n. Returns fewer than
/// n when the ladder runs out. Throws DstNotInPool.
std::vector<Ipv4> select_ips(Ipv4 ip_dst, std::size_t n, const ReservedIpPool& pool,
                             const std::vector<Ipv4>& occupied);

}  // namespace soar
