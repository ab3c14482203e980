#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "soar/catalog.hpp"
#include "soar/engine.hpp"
#include "soar/ip.hpp"
#include "soar/learners.hpp"
#include "soar/packet.hpp"
#include "soar/storage.hpp"

namespace soar {

struct ActorSpec {
  std::string name;
  Ipv4 ip;
};

struct ScenarioAction {
  enum class Verb : uint8_t {
    SCAN,
    HTTP_ATTACK,
    SSH_PROBE,
    SMTP_PROBE,
    MODBUS_PROBE,
    DROP_FILE,
    FLOOD,
    BEACON,
    IDLE,
  };

  double t = 0.0;
  std::string actor;
  Verb verb = Verb::IDLE;

  Cidr scan_subnet;                // SCAN
  std::vector<uint16_t> ports;     // SCAN
  double rate = 1.5;               // SCAN: seconds per host
  Ipv4 target;                     // everything targeted
  uint16_t port = 0;               // optional override
  AttackLabel attack = AttackLabel::SQLI;  // HTTP_ATTACK
  int count = 1;                   // HTTP_ATTACK / BEACON
  std::string file_path;           // DROP_FILE
  std::string file_bytes;          // DROP_FILE
  double pps = 100.0;              // FLOOD
  double flood_duration = 1.0;     // FLOOD
  double period = 10.0;            // BEACON
  int size = 64;                   // BEACON payload bytes
  double idle_seconds = 0.0;       // IDLE
};

const char* scenario_verb_name(ScenarioAction::Verb verb);

/// Declarative attack script. Same (script, seed) always produces the same
/// packet stream byte for byte.
struct ScenarioScript {
  std::string name = "scenario";
  uint64_t seed = 1;
  double duration = 0.0;
  std::vector<ActorSpec> actors;
  std::vector<ScenarioAction> actions;

  // engine overrides carried by the script so a scenario is self-contained
  Cidr subnet{Ipv4(172, 26, 233, 0), 24};
  std::vector<Ipv4> pool_ips;
  double deploy_latency = 0.0;
  bool deploy_ahead = true;
  double idle_timeout = 900.0;
  double engagement_gap = 300.0;

  struct LingerModel {
    int min_pkts = 3;
    int max_pkts = 6;
    double min_gap = 30.0;
    double max_gap = 240.0;
  } linger;

  static ScenarioScript parse(const std::string& text);          // throws ScriptValidation
  static ScenarioScript parse_file(const std::filesystem::path& path);
};

struct RaceRecord {
  size_t burst = 0;       // scan burst ordinal (1-based)
  Ipv4 ip;                // pre-positioned decoy address
  double active_at = 0.0;
  double scan_arrival = 0.0;
  bool win = false;
  double margin = 0.0;    // scan_arrival - active_at
};

struct ScenarioReport {
  std::string scenario;
  uint64_t seed = 0;
  std::string mode;  // dynamic | static
  double duration = 0.0;
  EngineCounters counters;
  std::map<std::string, uint64_t> deployments;  // DEPLOY events per template
  std::map<std::string, uint64_t> reap_counts;
  std::vector<EngagementRecord> engagements;    // sorted by descending duration
  double mean_engagement = 0.0;
  uint64_t samples_collected = 0;
  std::vector<RaceRecord> races;
  CpuSavingReport cpu;
  double total_uptime = 0.0;

  /// Every figure here is a projection of the event log, recomputable from
  /// it; the CSV layout is stable for golden-file comparison.
  std::string to_csv(size_t top_n = 10) const;
  std::string to_text(size_t top_n = 10) const;
};

struct ScenarioArtifacts {
  std::vector<Packet> traffic;          // the generated stream, fed order
  std::vector<Event> events;
  ScenarioReport report;
  std::map<std::string, HoneypotInstance> final_instances;
};

class ScenarioRunner {
 public:
  struct Overrides {
    std::optional<uint64_t> seed;
    std::optional<bool> deploy_ahead;
  };

  /// Runs the script against a fresh engine on the simulated backend in
  /// virtual time. Attackers linger on decoys that answer, which feeds the
  /// dynamic engagement gap; that linger model is a modeling assumption, not
  /// something derived.
  ScenarioArtifacts run(const ScenarioScript& script, const EngineModels& models,
                        Overrides overrides = {}) const;

  /// Static comparator: replays an already generated stream against
  /// always-on decoys, so both ledgers come from identical traffic.
  ScenarioArtifacts run_static(const ScenarioScript& script, const EngineModels& models,
                               std::span<const Packet> traffic) const;
};

// ---------------------------------------------------------------------------
// synthetic corpora (desk-scale stand-ins for the training datasets)

std::string build_attack_query(AttackLabel label, class Rng& rng);

Dataset gen_httpids_corpus(AttackLabel label, uint64_t seed, size_t n_benign, size_t n_attack);
Dataset gen_botnet_corpus(uint64_t seed, size_t n_normal, size_t n_beacon);
Dataset gen_ddos_corpus(uint64_t seed, size_t n_normal, size_t n_flood);

/// Writes the labeled CSVs for one task into out_dir; returns the file paths.
std::vector<std::filesystem::path> write_corpus(const std::string& task, uint64_t seed,
                                                size_t n_benign, size_t n_attack,
                                                const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------

struct RaceOutcome {
  bool win = false;
  double margin = 0.0;
};

/// Ready-to-response budget: the scan needs spacing*rate seconds to reach the
/// next reserved IP, the engine needs deploy_latency seconds to answer there.
RaceOutcome race_check(double scan_rate_s_per_host, double spacing_hosts,
                       double deploy_latency_s);

}  // namespace soar
