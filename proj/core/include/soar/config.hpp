#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "soar/backend.hpp"
#include "soar/catalog.hpp"
#include "soar/ip.hpp"
#include "soar/pool.hpp"

namespace soar {

struct BackendChoice {
  enum class Kind { SIMULATED, EXEC } kind = Kind::SIMULATED;
  double latency = 0.0;  // simulated start latency
  ExecBackendConfig exec;
};

struct DetectorToggles {
  bool http_ids = true;
  bool botnet = true;
  bool ddos = true;
};

/// Engine configuration. Defaults mirror the reference deployment: the seven
/// reserved IPs of the 172.26.233.0/24 ladder, 900 s idle timeout,
/// deploy-ahead on.
struct EngineConfig {
  Cidr subnet{Ipv4(172, 26, 233, 0), 24};
  std::vector<Ipv4> pool_ips = {Ipv4(172, 26, 233, 4),   Ipv4(172, 26, 233, 40),
                                Ipv4(172, 26, 233, 85),  Ipv4(172, 26, 233, 125),
                                Ipv4(172, 26, 233, 185), Ipv4(172, 26, 233, 220),
                                Ipv4(172, 26, 233, 250)};  // explicit ladder; wins over first/spacing
  std::optional<Ipv4> pool_first;      // regular ladder alternative
  int pool_spacing = 20;
  int pool_count = 7;
  std::optional<std::pair<Ipv4, Ipv4>> dhcp_range;

  double idle_timeout = 900.0;
  bool deploy_ahead = true;
  double engagement_gap = 300.0;

  BackendChoice backend;
  DetectorToggles detectors;
  Catalog catalog = Catalog::default_catalog();

  std::filesystem::path log_dir = "out";
  std::filesystem::path vault_dir;  // empty: in-memory vault

  // optional trained-model files; the built-in synthetic models are used
  // when absent
  std::filesystem::path model_sqli, model_xss, model_osc, model_botnet, model_ddos;

  ReservedIpPool make_pool() const;

  /// Strict loader: unknown keys are rejected, every value validated.
  /// Throws ConfigInvalid naming the offending key.
  static EngineConfig load_json(const std::filesystem::path& path);
};

}  // namespace soar
