#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "soar/backend.hpp"
#include "soar/config.hpp"
#include "soar/ddos.hpp"
#include "soar/flow.hpp"
#include "soar/http.hpp"
#include "soar/http_ids.hpp"
#include "soar/orchestrator.hpp"
#include "soar/storage.hpp"

namespace soar {

/// The trained detector set an engine runs with.
struct EngineModels {
  HttpIds http;
  ClassifierModel botnet;
  ClassifierModel ddos;
};

/// Builds the default detector set by training on the built-in synthetic
/// corpora. Deterministic for a fixed seed; takes a couple of seconds.
EngineModels default_models(uint64_t seed = 401);

struct EngineCounters {
  uint64_t total_packets = 0;
  uint64_t reserved_packets = 0;
  uint64_t ddos_packets = 0;
  uint64_t botnet_flows = 0;
  uint64_t ids_alerts = 0;
  std::map<std::string, uint64_t> alerts_by_label;
  std::map<std::string, uint64_t> attacks_by_template;  // detector-positive units per template
};

/// Single-owner event-driven core: consumes one merged, timestamp-ordered
/// packet stream, maintains the orchestrator state machine, the three
/// detectors, malware collection and the accounting ledgers. Reap checks run
/// at exact due instants interleaved with the stream, so idle boundaries are
/// hit precisely in virtual time.
class Engine {
 public:
  struct Options {
    double idle_timeout = 900.0;
    bool deploy_ahead = true;
    bool static_mode = false;
    DetectorToggles detectors;
    double engagement_gap = 300.0;
  };

  Engine(ReservedIpPool pool, Catalog catalog, Options options, Backend& backend,
         const EngineModels& models, MalwareVault& vault);

  /// Static mode deploys every base template up front.
  void begin(double t0 = 0.0);

  void on_packet(const Packet& p);

  /// Flushes open flow windows, fires reaps due up to end_ts and closes the
  /// uptime ledger at the horizon.
  void finish(double end_ts);

  /// Scenario hook: attacker dropped a file on a live decoy. Stores the
  /// sample and emits the notification.
  void on_file_planted(const std::string& instance_id, const std::string& path,
                       const std::string& bytes, double ts);

  const std::vector<Event>& events() const { return events_; }
  const std::vector<EngagementPoint>& engagement_points() const { return engagement_points_; }
  const EngineCounters& counters() const { return counters_; }
  const Orchestrator& orchestrator() const { return orch_; }
  Orchestrator& orchestrator() { return orch_; }
  const UptimeLedger& ledger() const { return ledger_; }
  MalwareVault& vault() { return vault_; }
  double end_ts() const { return end_ts_; }

 private:
  void append(std::vector<Event> events);
  void append(Event e);
  void run_due_reaps(double upto);
  void close_flows(std::vector<FlowRecord> closed, double notify_cap);

  Options options_;
  Backend& backend_;
  const EngineModels& models_;
  MalwareVault& vault_;
  Orchestrator orch_;
  DdosDetector ddos_;
  FlowAggregator flows_;
  HttpAssembler http_;
  std::set<uint16_t> http_ports_;

  std::vector<Event> events_;
  std::vector<EngagementPoint> engagement_points_;
  EngineCounters counters_;
  UptimeLedger ledger_;
  uint64_t next_seq_ = 0;
  double end_ts_ = 0.0;
  bool finished_ = false;
};

}  // namespace soar
