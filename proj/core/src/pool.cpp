#include "soar/pool.hpp"

#include <algorithm>

#include "soar/error.hpp"

namespace soar {

ReservedIpPool ReservedIpPool::from_ladder(Cidr subnet, Ipv4 first, int spacing_hosts,
                                           int count) {
  if (spacing_hosts <= 0)
    throw Error(ErrorCode::ConfigInvalid, "pool spacing must be positive");
  ReservedIpPool pool;
  pool.subnet_ = subnet;
  pool.spacing_ = spacing_hosts;
  for (int i = 0; i < count; ++i)
    pool.ips_.push_back(Ipv4(first.addr + uint32_t(i) * uint32_t(spacing_hosts)));
  pool.validate();
  return pool;
}

ReservedIpPool ReservedIpPool::from_list(Cidr subnet, std::vector<Ipv4> ips) {
  ReservedIpPool pool;
  pool.subnet_ = subnet;
  pool.ips_ = std::move(ips);
  pool.validate();
  int min_gap = 0;
  for (size_t i = 1; i < pool.ips_.size(); ++i) {
    int gap = int(pool.ips_[i].addr - pool.ips_[i - 1].addr);
    if (min_gap == 0 || gap < min_gap) min_gap = gap;
  }
  pool.spacing_ = min_gap;
  return pool;
}

void ReservedIpPool::validate() {
  if (ips_.size() < 2 || ips_.size() > 16)
    throw Error(ErrorCode::ConfigInvalid,
                "pool size must be 2..16, got " + std::to_string(ips_.size()));
  for (size_t i = 0; i < ips_.size(); ++i) {
    if (i > 0 && ips_[i].addr <= ips_[i - 1].addr)
      throw Error(ErrorCode::ConfigInvalid, "pool IPs must be strictly increasing");
    if (!subnet_.contains(ips_[i]))
      throw Error(ErrorCode::ConfigInvalid, ips_[i].str() + " outside " + subnet_.str());
  }
}

bool ReservedIpPool::contains(Ipv4 ip) const { return ip_in_pool(ip, ips_); }

void ReservedIpPool::check_dhcp_overlap(Ipv4 start, Ipv4 end) const {
  for (Ipv4 ip : ips_) {
    if (ip >= start && ip <= end)
      throw Error(ErrorCode::ConfigInvalid, "reserved IP " + ip.str() + " inside DHCP range");
  }
}

bool ip_in_pool(Ipv4 ip, std::span<const Ipv4> pool_ips) {
  return std::binary_search(pool_ips.begin(), pool_ips.end(), ip);
}

bool is_reserved_target(const Packet& p, const ReservedIpPool& pool) {
  return pool.contains(p.ip_dst);
}

std::vector<Ipv4> select_ips(Ipv4 ip_dst, std::size_t n, const ReservedIpPool& pool,
                             const std::vector<Ipv4>& occupied) {
  const auto& ladder = pool.ips();
  if (!pool.contains(ip_dst))
    throw Error(ErrorCode::DstNotInPool, ip_dst.str());

  std::vector<Ipv4> candidates;
  candidates.reserve(ladder.size());
  for (Ipv4 ip : ladder) {
    if (ip == ip_dst) continue;
    if (std::find(occupied.begin(), occupied.end(), ip) != occupied.end()) continue;
    candidates.push_back(ip);
  }

  std::size_t take = std::min(n, candidates.size());
  if (ip_dst == ladder.front())
    return {candidates.begin(), candidates.begin() + std::ptrdiff_t(take)};
  return {candidates.end() - std::ptrdiff_t(take), candidates.end()};
}

}  // namespace soar
