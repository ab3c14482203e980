#include "soar/backend.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "soar/error.hpp"
#include "soar/storage.hpp"

namespace soar {

StartOutcome SimulatedBackend::start(const HoneypotTemplate& tmpl, Ipv4 ip,
                                     const std::string& id, double ts) {
  if (missing_images_.count(tmpl.image_id))
    throw Error(ErrorCode::ImageMissing, tmpl.image_id);
  for (const auto& [other, inst] : instances_) {
    if (inst.running && inst.ip == ip) throw Error(ErrorCode::AddressInUse, ip.str());
  }
  instances_[id] = Instance{ip, tmpl.image_id, true, {}};
  actions_.push_back({BackendAction::Kind::START, id, tmpl.image_id, ip, ts, ts + latency_, true});
  return StartOutcome{true, latency_, ""};
}

StopOutcome SimulatedBackend::stop_with_backup(const std::string& id, double ts) {
  auto it = instances_.find(id);
  if (it == instances_.end() || !it->second.running)
    throw Error(ErrorCode::StaleHandle, id);
  Instance& inst = it->second;

  StopOutcome out;
  if (fail_next_backup_) {
    fail_next_backup_ = false;
    out.backup_ok = false;
    out.error = "BackupFailed";
  } else {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "bk-%04llu", (unsigned long long)next_backup_++);
    BackupRecord rec;
    rec.id = buf;
    rec.instance_id = id;
    rec.image_id = inst.image_id;
    rec.ts = ts;
    rec.files = inst.files;
    std::sort(rec.files.begin(), rec.files.end(),
              [](const NewFile& a, const NewFile& b) { return a.path < b.path; });
    backups_[rec.id] = rec;
    out.backup_id = buf;
    out.file_count = rec.files.size();
  }
  inst.running = false;  // destroyed even when the backup failed
  actions_.push_back(
      {BackendAction::Kind::STOP_WITH_BACKUP, id, inst.image_id, inst.ip, ts, ts, out.backup_ok});
  return out;
}

std::vector<NewFile> SimulatedBackend::list_new_files(const std::string& id, double since) {
  auto it = instances_.find(id);
  if (it == instances_.end() || !it->second.running)
    throw Error(ErrorCode::StaleHandle, id);
  std::vector<NewFile> out;
  for (const NewFile& f : it->second.files) {
    if (f.created_at > since) out.push_back(f);
  }
  std::sort(out.begin(), out.end(), [](const NewFile& a, const NewFile& b) {
    return a.path < b.path;
  });
  actions_.push_back({BackendAction::Kind::LIST_NEW_FILES, id, it->second.image_id,
                      it->second.ip, since, since, true});
  return out;
}

void SimulatedBackend::plant_file(const std::string& id, const std::string& path,
                                  const std::string& bytes, double ts) {
  auto it = instances_.find(id);
  if (it == instances_.end() || !it->second.running)
    throw Error(ErrorCode::StaleHandle, id);
  NewFile f;
  f.path = path;
  f.bytes.assign(bytes.begin(), bytes.end());
  f.sha256 = sha256_hex(bytes);
  f.created_at = ts;
  it->second.files.push_back(std::move(f));
}

bool SimulatedBackend::is_running(const std::string& id) const {
  auto it = instances_.find(id);
  return it != instances_.end() && it->second.running;
}

// ---------------------------------------------------------------------------

ExecBackend::ExecBackend(ExecBackendConfig config, Runner runner)
    : config_(std::move(config)), runner_(std::move(runner)) {}

int ExecBackend::run(const std::string& command) {
  command_log_.push_back(command);
  if (runner_) return runner_(command);
  return std::system(command.c_str());
}

bool ExecBackend::wait_ready(Ipv4 ip, uint16_t port) const {
  // readiness = TCP connect success on the template port
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(int64_t(config_.readiness_timeout * 1000));
  do {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd >= 0) {
      sockaddr_in sa{};
      sa.sin_family = AF_INET;
      sa.sin_port = htons(port);
      sa.sin_addr.s_addr = htonl(ip.addr);
      int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa));
      ::close(fd);
      if (rc == 0) return true;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(250));
  } while (std::chrono::steady_clock::now() < deadline);
  return false;
}

StartOutcome ExecBackend::start(const HoneypotTemplate& tmpl, Ipv4 ip, const std::string& id,
                                double ts) {
  std::string image = config_.registry + tmpl.image_id;
  std::string cmd = config_.runtime + " run -d --rm --name " + id + " --network " +
                    config_.network + " --ip " + ip.str() + " " + image;
  auto t0 = std::chrono::steady_clock::now();
  if (run(cmd) != 0) throw Error(ErrorCode::ImageMissing, image);
  if (runner_ == nullptr && !wait_ready(ip, tmpl.port)) {
    run(config_.runtime + " rm -f " + id);
    throw Error(ErrorCode::ReadinessTimeout, id);
  }
  double latency =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  instances_[id] = {ip, image};
  actions_.push_back({BackendAction::Kind::START, id, image, ip, ts, ts + latency, true});
  return StartOutcome{true, latency, ""};
}

StopOutcome ExecBackend::stop_with_backup(const std::string& id, double ts) {
  auto it = instances_.find(id);
  if (it == instances_.end()) throw Error(ErrorCode::StaleHandle, id);

  char buf[16];
  std::snprintf(buf, sizeof(buf), "bk-%04llu", (unsigned long long)next_backup_++);
  StopOutcome out;
  out.backup_id = buf;
  // filesystem delta exported next to the engine; contents are opaque here
  int rc = run(config_.runtime + " export " + id + " -o " + id + "-" + buf + ".tar");
  out.backup_ok = rc == 0;
  if (rc != 0) out.error = "BackupFailed";
  run(config_.runtime + " rm -f " + id);
  actions_.push_back({BackendAction::Kind::STOP_WITH_BACKUP, id, it->second.second,
                      it->second.first, ts, ts, out.backup_ok});
  instances_.erase(it);
  return out;
}

std::vector<NewFile> ExecBackend::list_new_files(const std::string& id, double since) {
  auto it = instances_.find(id);
  if (it == instances_.end()) throw Error(ErrorCode::StaleHandle, id);
  // `runtime diff` lists added paths; content retrieval is left to the
  // operator, so entries carry paths only
  run(config_.runtime + " diff " + id);
  actions_.push_back({BackendAction::Kind::LIST_NEW_FILES, id, it->second.second,
                      it->second.first, since, since, true});
  return {};
}

}  // namespace soar
