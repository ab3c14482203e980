#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soar/events.hpp"
#include "soar/ip.hpp"

namespace soar {

std::string sha256_hex(std::span<const uint8_t> bytes);
std::string sha256_hex(const std::string& bytes);

// ---------------------------------------------------------------------------
// event log persistence

void write_event_log(const std::filesystem::path& path, std::span<const Event> events);
std::vector<Event> read_event_log(const std::filesystem::path& path);

/// Instance state reconstructed purely from the append-only event log; used
/// to prove the log is replayable.
struct ReplayedInstance {
  std::string id;
  std::string tmpl;
  std::string ip;
  std::string stage;  // DEPLOYING / ACTIVE / REAPED
  double deployed_at = 0.0;
  double active_at = 0.0;
  double last_activity = 0.0;
  double reaped_at = -1.0;
  std::string backup_id;
};

std::map<std::string, ReplayedInstance> replay_log(std::span<const Event> events,
                                                   double end_ts);

// ---------------------------------------------------------------------------
// malware vault

struct MalwareSample {
  std::string sha256;
  uint64_t size = 0;
  double first_seen_ts = 0.0;
  std::string source_instance;
  std::string original_path;
  std::string blob_ref;  // on-disk blob file, empty in memory-only mode
};

/// Content-addressed sample store: one blob per distinct sha256, metadata
/// append-only, duplicate stores return the original record.
class MalwareVault {
 public:
  MalwareVault() = default;  // memory-only
  explicit MalwareVault(std::filesystem::path dir);

  /// Throws EmptyFile on empty input.
  const MalwareSample& store_sample(std::span<const uint8_t> bytes, double ts,
                                    const std::string& source_instance,
                                    const std::string& original_path);

  const std::map<std::string, MalwareSample>& samples() const { return samples_; }
  size_t size() const { return samples_.size(); }

 private:
  std::filesystem::path dir_;
  std::map<std::string, MalwareSample> samples_;  // keyed by sha256
};

// ---------------------------------------------------------------------------
// engagement accounting

struct EngagementPoint {
  double ts = 0.0;
  Ipv4 attacker;
  std::string instance;
};

struct EngagementRecord {
  Ipv4 attacker;
  std::string instance;
  double start_ts = 0.0;
  double end_ts = 0.0;
  double duration = 0.0;
};

/// Session-gap rule: a session is a maximal run of packets from one attacker
/// to one instance with inter-packet gap < gap seconds; duration is last
/// minus first. Output is sorted by descending duration. This measurement
/// rule is ours, not the paper's (which reports times without defining one).
std::vector<EngagementRecord> compute_engagements(std::span<const EngagementPoint> points,
                                                  double gap = 300.0);

// ---------------------------------------------------------------------------
// uptime / CPU-time accounting

class UptimeLedger {
 public:
  void register_template(const std::string& tmpl);
  void add_interval(const std::string& tmpl, Ipv4 ip, double start, double end);

  double total_uptime() const;
  double template_uptime(const std::string& tmpl) const;
  const std::vector<std::string>& templates() const { return templates_; }
  size_t interval_count() const { return intervals_.size(); }

  struct Interval {
    std::string tmpl;
    Ipv4 ip;
    double start, end;
  };
  const std::vector<Interval>& intervals() const { return intervals_; }

 private:
  std::vector<std::string> templates_;
  std::vector<Interval> intervals_;
};

struct CpuSavingReport {
  struct PerTemplate {
    std::string tmpl;
    double uptime = 0.0;
    double saved_pct = 0.0;
  };
  std::vector<PerTemplate> per_template;
  double total_uptime = 0.0;
  double total_saved_pct = 0.0;
};

/// Saving vs. running every registered template always-on for the horizon:
/// saved = 1 - uptime / (templates * horizon).
CpuSavingReport cpu_saving_report(const UptimeLedger& ledger, double horizon);

}  // namespace soar
