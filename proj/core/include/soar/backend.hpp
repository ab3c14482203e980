#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "soar/catalog.hpp"
#include "soar/ip.hpp"
#include "soar/orchestrator.hpp"

namespace soar {

struct BackendAction {
  enum class Kind : uint8_t { START, STOP_WITH_BACKUP, LIST_NEW_FILES } kind;
  std::string instance_id;
  std::string image_id;
  Ipv4 ip;
  double issued_at = 0.0;
  double completed_at = 0.0;
  bool ok = true;

  double latency() const { return completed_at - issued_at; }
};

struct NewFile {
  std::string path;
  std::vector<uint8_t> bytes;
  std::string sha256;
  double created_at = 0.0;
};

/// Backup produced at reap time: the instance filesystem delta plus a
/// reference to the image it ran.
struct BackupRecord {
  std::string id;
  std::string instance_id;
  std::string image_id;
  double ts = 0.0;
  std::vector<NewFile> files;
};

class Backend {
 public:
  virtual ~Backend() = default;

  /// Throws ImageMissing / AddressInUse; exec backend may throw
  /// ReadinessTimeout.
  virtual StartOutcome start(const HoneypotTemplate& tmpl, Ipv4 ip, const std::string& id,
                             double ts) = 0;

  /// Snapshots the filesystem delta, then destroys the instance. A backup
  /// failure is reported in the outcome, never fatal. Throws StaleHandle.
  virtual StopOutcome stop_with_backup(const std::string& id, double ts) = 0;

  /// Files created strictly after `since`, ordered by path. Throws
  /// StaleHandle.
  virtual std::vector<NewFile> list_new_files(const std::string& id, double since) = 0;

  const std::vector<BackendAction>& actions() const { return actions_; }

 protected:
  std::vector<BackendAction> actions_;
};

/// Deterministic in-process backend: the default substrate for scenarios and
/// tests. Instances carry a synthetic file set that scenario attackers can
/// plant files into.
class SimulatedBackend : public Backend {
 public:
  explicit SimulatedBackend(double start_latency = 0.0) : latency_(start_latency) {}

  StartOutcome start(const HoneypotTemplate& tmpl, Ipv4 ip, const std::string& id,
                     double ts) override;
  StopOutcome stop_with_backup(const std::string& id, double ts) override;
  std::vector<NewFile> list_new_files(const std::string& id, double since) override;

  void plant_file(const std::string& id, const std::string& path, const std::string& bytes,
                  double ts);
  bool is_running(const std::string& id) const;

  const std::map<std::string, BackupRecord>& backups() const { return backups_; }

  // test hooks
  void set_missing_image(const std::string& image_id) { missing_images_.insert(image_id); }
  void fail_next_backup() { fail_next_backup_ = true; }

 private:
  struct Instance {
    Ipv4 ip;
    std::string image_id;
    bool running = true;
    std::vector<NewFile> files;
  };

  double latency_;
  std::map<std::string, Instance> instances_;
  std::map<std::string, BackupRecord> backups_;
  std::set<std::string> missing_images_;
  uint64_t next_backup_ = 1;
  bool fail_next_backup_ = false;
};

struct ExecBackendConfig {
  std::string runtime = "docker";
  std::string registry;            // image id prefix, e.g. registry.local/hp/
  std::string network = "bridge";
  double readiness_timeout = 30.0;  // well above the observed deploy time
};

/// Drives an external container runtime. Best-effort: excluded from CI, every
/// spawned command line is logged verbatim. A custom runner can be injected
/// to test command construction without a runtime present.
class ExecBackend : public Backend {
 public:
  using Runner = std::function<int(const std::string& command)>;

  explicit ExecBackend(ExecBackendConfig config, Runner runner = {});

  StartOutcome start(const HoneypotTemplate& tmpl, Ipv4 ip, const std::string& id,
                     double ts) override;
  StopOutcome stop_with_backup(const std::string& id, double ts) override;
  std::vector<NewFile> list_new_files(const std::string& id, double since) override;

  const std::vector<std::string>& command_log() const { return command_log_; }

 private:
  int run(const std::string& command);
  bool wait_ready(Ipv4 ip, uint16_t port) const;

  ExecBackendConfig config_;
  Runner runner_;
  std::vector<std::string> command_log_;
  std::map<std::string, std::pair<Ipv4, std::string>> instances_;  // id -> (ip, image)
  uint64_t next_backup_ = 1;
};

}  // namespace soar
