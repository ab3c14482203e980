#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "soar/catalog.hpp"
#include "soar/events.hpp"
#include "soar/packet.hpp"
#include "soar/pool.hpp"

namespace soar {

enum class InstanceStage : uint8_t { DEPLOYING, ACTIVE, REAPED };

const char* instance_stage_name(InstanceStage s);

struct HoneypotInstance {
  std::string id;
  HoneypotTemplate tmpl;
  Ipv4 ip;
  InstanceStage stage = InstanceStage::DEPLOYING;
  double deployed_at = 0.0;
  double active_at = 0.0;     // deployed_at + backend latency
  double last_activity = 0.0;
  double reaped_at = -1.0;
  std::string backup_id;

  bool live() const { return stage != InstanceStage::REAPED; }
};

/// Outcome of a backend start request. On failure `error` names the cause and
/// the instance is not created.
struct StartOutcome {
  bool ok = true;
  double latency = 0.0;
  std::string error;
};

/// Outcome of stop-with-backup. A failed backup is non-fatal: the instance is
/// destroyed either way and the failure lands in the REAP event detail.
struct StopOutcome {
  bool backup_ok = true;
  std::string backup_id;
  uint64_t file_count = 0;
  std::string error;
};

struct OrchestratorOptions {
  double idle_timeout = 900.0;  // seconds with no activity before reap
  bool deploy_ahead = true;     // pre-position at the next free reserved IP
  bool static_mode = false;     // comparator: fixed decoys, no deploy/reap
};

/// The decision core. Single-owner state machine: the caller feeds packets,
/// alerts and reap ticks in timestamp order and appends the returned events
/// to the log. Start/stop side effects run through injected hooks so the
/// orchestrator itself stays backend-agnostic.
class Orchestrator {
 public:
  using StartFn = std::function<StartOutcome(const HoneypotTemplate&, Ipv4, const std::string& id,
                                             double ts)>;
  using StopFn = std::function<StopOutcome(const std::string& id, double ts)>;

  Orchestrator(ReservedIpPool pool, Catalog catalog, OrchestratorOptions options, StartFn start,
               StopFn stop);

  /// Promotes DEPLOYING instances whose activation time has passed.
  void advance_to(double ts);

  /// Caller guarantees is_reserved_target(p). Emits TOUCH / DEPLOY / NOTIFY
  /// per the deployment rules.
  std::vector<Event> on_packet(const Packet& p);

  /// IDS verdict on traffic seen at an HTTP decoy: deploy (or touch) the
  /// matching vulnerable follow-up template.
  std::vector<Event> on_ids_alert(AttackLabel label, Ipv4 honeypot_ip, Ipv4 src_ip, double ts);

  /// Reaps every instance idle for idle_timeout or longer, ordered by id.
  std::vector<Event> reap_idle(double now);

  /// Earliest future instant at which some live instance becomes reapable.
  std::optional<double> next_reap_due() const;

  /// Static comparator bootstrap: one always-on instance per base template on
  /// the first reserved IPs.
  std::vector<Event> deploy_static_all(double ts);

  const std::map<std::string, HoneypotInstance>& instances() const { return instances_; }
  const HoneypotInstance* instance_at(Ipv4 ip) const;  // live instance on that IP
  const ReservedIpPool& pool() const { return pool_; }
  const Catalog& catalog() const { return catalog_; }
  const OrchestratorOptions& options() const { return options_; }

 private:
  std::vector<Ipv4> occupied_ips() const;
  HoneypotInstance* live_by_service(Service service);
  Event deploy(const HoneypotTemplate& tmpl, Ipv4 ip, double ts, const char* origin,
               const Packet* trigger);
  Event touch(HoneypotInstance& inst, double ts, Ipv4 src, uint16_t port);
  static Event notify(double ts, const std::string& reason,
                      std::vector<std::pair<std::string, std::string>> extra);

  ReservedIpPool pool_;
  Catalog catalog_;
  OrchestratorOptions options_;
  StartFn start_;
  StopFn stop_;
  std::map<std::string, HoneypotInstance> instances_;
  uint64_t next_instance_ = 1;
};

}  // namespace soar
