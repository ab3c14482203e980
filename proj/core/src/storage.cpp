#include "soar/storage.hpp"

#include <algorithm>
#include <fstream>

#include <openssl/evp.h>

#include "soar/error.hpp"

namespace soar {

std::string sha256_hex(std::span<const uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0x0f]);
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  return sha256_hex(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(bytes.data()),
                                             bytes.size()));
}

void write_event_log(const std::filesystem::path& path, std::span<const Event> events) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  for (const Event& e : events) out << event_to_jsonl(e) << '\n';
}

std::vector<Event> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<Event> events;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) events.push_back(event_from_jsonl(line));
  }
  return events;
}

std::map<std::string, ReplayedInstance> replay_log(std::span<const Event> events,
                                                   double end_ts) {
  std::map<std::string, ReplayedInstance> out;
  for (const Event& e : events) {
    switch (e.kind) {
      case EventKind::DEPLOY: {
        ReplayedInstance inst;
        inst.id = e.instance;
        inst.tmpl = e.tmpl;
        inst.ip = e.ip;
        inst.deployed_at = e.ts;
        inst.active_at = e.detail_num("active_at", e.ts);
        inst.last_activity = e.ts;
        inst.stage = "DEPLOYING";
        out[e.instance] = std::move(inst);
        break;
      }
      case EventKind::TOUCH: {
        auto it = out.find(e.instance);
        if (it != out.end()) it->second.last_activity = std::max(it->second.last_activity, e.ts);
        break;
      }
      case EventKind::REAP: {
        auto it = out.find(e.instance);
        if (it != out.end()) {
          it->second.stage = "REAPED";
          it->second.reaped_at = e.ts;
          if (const std::string* b = e.detail_get("backup_id")) it->second.backup_id = *b;
        }
        break;
      }
      default:
        break;
    }
  }
  for (auto& [id, inst] : out) {
    if (inst.stage != "REAPED" && end_ts >= inst.active_at) inst.stage = "ACTIVE";
  }
  return out;
}

MalwareVault::MalwareVault(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

const MalwareSample& MalwareVault::store_sample(std::span<const uint8_t> bytes, double ts,
                                                const std::string& source_instance,
                                                const std::string& original_path) {
  if (bytes.empty()) throw Error(ErrorCode::EmptyFile, original_path);
  std::string digest = sha256_hex(bytes);
  auto it = samples_.find(digest);
  if (it != samples_.end()) return it->second;  // dedup, first_seen preserved

  MalwareSample sample;
  sample.sha256 = digest;
  sample.size = bytes.size();
  sample.first_seen_ts = ts;
  sample.source_instance = source_instance;
  sample.original_path = original_path;

  if (!dir_.empty()) {
    auto blob = dir_ / digest;
    auto tmp = dir_ / (digest + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
      out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    }
    std::filesystem::rename(tmp, blob);  // atomic publish
    sample.blob_ref = blob.string();
  }
  return samples_.emplace(digest, std::move(sample)).first->second;
}

std::vector<EngagementRecord> compute_engagements(std::span<const EngagementPoint> points,
                                                  double gap) {
  struct Open {
    double start, last;
  };
  std::map<std::pair<uint32_t, std::string>, Open> open;
  std::vector<EngagementRecord> records;

  auto close = [&](const std::pair<uint32_t, std::string>& key, const Open& o) {
    records.push_back({Ipv4(key.first), key.second, o.start, o.last, o.last - o.start});
  };

  for (const EngagementPoint& p : points) {
    auto key = std::make_pair(p.attacker.addr, p.instance);
    auto it = open.find(key);
    if (it == open.end()) {
      open[key] = {p.ts, p.ts};
    } else if (p.ts - it->second.last >= gap) {
      close(key, it->second);
      it->second = {p.ts, p.ts};
    } else {
      it->second.last = p.ts;
    }
  }
  for (const auto& [key, o] : open) close(key, o);

  std::sort(records.begin(), records.end(), [](const EngagementRecord& a,
                                               const EngagementRecord& b) {
    if (a.duration != b.duration) return a.duration > b.duration;
    if (a.attacker != b.attacker) return a.attacker < b.attacker;
    if (a.instance != b.instance) return a.instance < b.instance;
    return a.start_ts < b.start_ts;
  });
  return records;
}

void UptimeLedger::register_template(const std::string& tmpl) {
  if (std::find(templates_.begin(), templates_.end(), tmpl) == templates_.end())
    templates_.push_back(tmpl);
}

void UptimeLedger::add_interval(const std::string& tmpl, Ipv4 ip, double start, double end) {
  if (end < start) throw Error(ErrorCode::ConfigInvalid, "interval end before start");
  register_template(tmpl);
  intervals_.push_back({tmpl, ip, start, end});
}

double UptimeLedger::total_uptime() const {
  double sum = 0.0;
  for (const auto& iv : intervals_) sum += iv.end - iv.start;
  return sum;
}

double UptimeLedger::template_uptime(const std::string& tmpl) const {
  double sum = 0.0;
  for (const auto& iv : intervals_) {
    if (iv.tmpl == tmpl) sum += iv.end - iv.start;
  }
  return sum;
}

CpuSavingReport cpu_saving_report(const UptimeLedger& ledger, double horizon) {
  CpuSavingReport report;
  for (const std::string& tmpl : ledger.templates()) {
    double up = ledger.template_uptime(tmpl);
    double saved = horizon > 0 ? (1.0 - up / horizon) * 100.0 : 0.0;
    report.per_template.push_back({tmpl, up, saved});
    report.total_uptime += up;
  }
  double denom = double(ledger.templates().size()) * horizon;
  report.total_saved_pct = denom > 0 ? (1.0 - report.total_uptime / denom) * 100.0 : 0.0;
  return report;
}

}  // namespace soar
