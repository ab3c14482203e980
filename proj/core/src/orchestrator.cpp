#include "soar/orchestrator.hpp"

#include <algorithm>
#include <cstdio>

namespace soar {
namespace {

std::string fmt_num(double v) { return format_ts(v); }

}  // namespace

const char* instance_stage_name(InstanceStage s) {
  switch (s) {
    case InstanceStage::DEPLOYING: return "DEPLOYING";
    case InstanceStage::ACTIVE: return "ACTIVE";
    case InstanceStage::REAPED: return "REAPED";
  }
  return "?";
}

Orchestrator::Orchestrator(ReservedIpPool pool, Catalog catalog, OrchestratorOptions options,
                           StartFn start, StopFn stop)
    : pool_(std::move(pool)),
      catalog_(std::move(catalog)),
      options_(options),
      start_(std::move(start)),
      stop_(std::move(stop)) {}

void Orchestrator::advance_to(double ts) {
  for (auto& [id, inst] : instances_) {
    if (inst.stage == InstanceStage::DEPLOYING && ts >= inst.active_at)
      inst.stage = InstanceStage::ACTIVE;
  }
}

const HoneypotInstance* Orchestrator::instance_at(Ipv4 ip) const {
  for (const auto& [id, inst] : instances_) {
    if (inst.live() && inst.ip == ip) return &inst;
  }
  return nullptr;
}

std::vector<Ipv4> Orchestrator::occupied_ips() const {
  std::vector<Ipv4> out;
  for (const auto& [id, inst] : instances_) {
    if (inst.live()) out.push_back(inst.ip);
  }
  return out;
}

HoneypotInstance* Orchestrator::live_by_service(Service service) {
  // map keys are the zero-padded ids, so iteration order == creation order
  for (auto& [id, inst] : instances_) {
    if (inst.live() && inst.tmpl.service == service) return &inst;
  }
  return nullptr;
}

Event Orchestrator::notify(double ts, const std::string& reason,
                           std::vector<std::pair<std::string, std::string>> extra) {
  Event e;
  e.ts = ts;
  e.kind = EventKind::NOTIFY;
  e.detail.emplace_back("reason", reason);
  for (auto& kv : extra) e.detail.push_back(std::move(kv));
  return e;
}

Event Orchestrator::deploy(const HoneypotTemplate& tmpl, Ipv4 ip, double ts, const char* origin,
                           const Packet* trigger) {
  char idbuf[16];
  std::snprintf(idbuf, sizeof(idbuf), "hp-%04llu", (unsigned long long)next_instance_);
  std::string id = idbuf;

  StartOutcome started = start_(tmpl, ip, id, ts);
  if (!started.ok) {
    return notify(ts, "deploy-failed",
                  {{"template", service_name(tmpl.service)},
                   {"ip", ip.str()},
                   {"error", started.error}});
  }
  next_instance_++;

  HoneypotInstance inst;
  inst.id = id;
  inst.tmpl = tmpl;
  inst.ip = ip;
  inst.deployed_at = ts;
  inst.active_at = ts + started.latency;
  inst.last_activity = ts;
  inst.stage = started.latency <= 0.0 ? InstanceStage::ACTIVE : InstanceStage::DEPLOYING;
  instances_[id] = inst;

  Event e;
  e.ts = ts;
  e.kind = EventKind::DEPLOY;
  e.instance = id;
  e.tmpl = service_name(tmpl.service);
  e.ip = ip.str();
  e.detail.emplace_back("image", tmpl.image_id);
  e.detail.emplace_back("port", std::to_string(tmpl.port));
  e.detail.emplace_back("latency", fmt_num(started.latency));
  e.detail.emplace_back("active_at", fmt_num(inst.active_at));
  e.detail.emplace_back("origin", origin);
  if (trigger) {
    e.detail.emplace_back("trigger_ip", trigger->ip_dst.str());
    e.detail.emplace_back("trigger_src", trigger->ip_src.str());
  }
  return e;
}

Event Orchestrator::touch(HoneypotInstance& inst, double ts, Ipv4 src, uint16_t port) {
  inst.last_activity = std::max(inst.last_activity, ts);
  Event e;
  e.ts = ts;
  e.kind = EventKind::TOUCH;
  e.instance = inst.id;
  e.tmpl = service_name(inst.tmpl.service);
  e.ip = inst.ip.str();
  e.detail.emplace_back("src", src.str());
  e.detail.emplace_back("port", std::to_string(port));
  return e;
}

std::vector<Event> Orchestrator::on_packet(const Packet& p) {
  std::vector<Event> events;
  const HoneypotTemplate* tmpl = catalog_.match_port(p.dst_port);

  // traffic at the probed decoy counts as activity regardless of which
  // template matched the port; prefer the instance actually being hit
  for (auto& [id, inst] : instances_) {
    if (inst.live() && inst.ip == p.ip_dst && inst.tmpl.port == p.dst_port) {
      events.push_back(touch(inst, p.ts, p.ip_src, p.dst_port));
      return events;
    }
  }

  if (!tmpl) {
    events.push_back(notify(p.ts, "unknown-port-probe",
                            {{"ip", p.ip_dst.str()},
                             {"port", std::to_string(p.dst_port)},
                             {"src", p.ip_src.str()}}));
    return events;
  }

  if (HoneypotInstance* live = live_by_service(tmpl->service)) {
    events.push_back(touch(*live, p.ts, p.ip_src, p.dst_port));
    return events;
  }

  if (options_.static_mode) return events;  // comparator never deploys

  if (options_.deploy_ahead) {
    auto ahead = select_ips(p.ip_dst, 1, pool_, occupied_ips());
    if (ahead.empty()) {
      events.push_back(notify(p.ts, "pool-exhausted",
                              {{"template", service_name(tmpl->service)},
                               {"ip", p.ip_dst.str()}}));
      return events;
    }
    // probed IP answers future probes, the ahead IP is pre-positioned in
    // front of the scan
    if (instance_at(p.ip_dst) == nullptr)
      events.push_back(deploy(*tmpl, p.ip_dst, p.ts, "probe", &p));
    events.push_back(deploy(*tmpl, ahead[0], p.ts, "ahead", &p));
  } else {
    if (instance_at(p.ip_dst) == nullptr) {
      events.push_back(deploy(*tmpl, p.ip_dst, p.ts, "probe", &p));
    } else {
      events.push_back(notify(p.ts, "ip-occupied",
                              {{"template", service_name(tmpl->service)},
                               {"ip", p.ip_dst.str()}}));
    }
  }
  return events;
}

std::vector<Event> Orchestrator::on_ids_alert(AttackLabel label, Ipv4 honeypot_ip, Ipv4 src_ip,
                                              double ts) {
  std::vector<Event> events;
  const HoneypotInstance* at = instance_at(honeypot_ip);
  if (!at || !at->tmpl.is_http()) return events;  // alert must come from a live HTTP decoy

  Event alert;
  alert.ts = ts;
  alert.kind = EventKind::ALERT_FOLLOWUP;
  alert.instance = at->id;
  alert.ip = honeypot_ip.str();
  alert.detail.emplace_back("label", attack_label_name(label));
  alert.detail.emplace_back("src", src_ip.str());
  events.push_back(std::move(alert));

  if (options_.static_mode) return events;

  const HoneypotTemplate* ft = catalog_.follow_up(label);
  if (!ft) {
    events.push_back(notify(ts, "no-followup-template",
                            {{"label", attack_label_name(label)}}));
    return events;
  }
  if (HoneypotInstance* live = live_by_service(ft->service)) {
    events.push_back(touch(*live, ts, src_ip, ft->port));
    return events;
  }
  auto sel = select_ips(honeypot_ip, 1, pool_, occupied_ips());
  if (sel.empty()) {
    events.push_back(notify(ts, "pool-exhausted",
                            {{"template", service_name(ft->service)},
                             {"ip", honeypot_ip.str()}}));
    return events;
  }
  events.push_back(deploy(*ft, sel[0], ts, "followup", nullptr));
  return events;
}

std::vector<Event> Orchestrator::reap_idle(double now) {
  std::vector<Event> events;
  if (options_.static_mode) return events;
  advance_to(now);

  std::vector<HoneypotInstance*> due;
  for (auto& [id, inst] : instances_) {
    if (inst.stage == InstanceStage::ACTIVE && now - inst.last_activity >= options_.idle_timeout)
      due.push_back(&inst);
  }
  std::sort(due.begin(), due.end(),
            [](const HoneypotInstance* a, const HoneypotInstance* b) { return a->id < b->id; });

  for (HoneypotInstance* inst : due) {
    StopOutcome stopped = stop_(inst->id, now);
    inst->stage = InstanceStage::REAPED;
    inst->reaped_at = now;
    inst->backup_id = stopped.backup_id;

    Event e;
    e.ts = now;
    e.kind = EventKind::REAP;
    e.instance = inst->id;
    e.tmpl = service_name(inst->tmpl.service);
    e.ip = inst->ip.str();
    e.detail.emplace_back("idle", fmt_num(now - inst->last_activity));
    e.detail.emplace_back("backup_id", stopped.backup_id);
    e.detail.emplace_back("backup_ok", stopped.backup_ok ? "true" : "false");
    e.detail.emplace_back("files", std::to_string(stopped.file_count));
    if (!stopped.error.empty()) e.detail.emplace_back("error", stopped.error);
    events.push_back(std::move(e));
  }
  return events;
}

std::optional<double> Orchestrator::next_reap_due() const {
  if (options_.static_mode) return std::nullopt;
  std::optional<double> due;
  for (const auto& [id, inst] : instances_) {
    if (!inst.live()) continue;
    // an instance cannot be reaped before it finishes activating
    double t = std::max(inst.last_activity + options_.idle_timeout, inst.active_at);
    if (!due || t < *due) due = t;
  }
  return due;
}

std::vector<Event> Orchestrator::deploy_static_all(double ts) {
  std::vector<Event> events;
  const auto& ladder = pool_.ips();
  size_t slot = 0;
  for (const HoneypotTemplate* t : catalog_.base_templates()) {
    if (slot >= ladder.size()) break;
    events.push_back(deploy(*t, ladder[slot++], ts, "static", nullptr));
  }
  return events;
}

}  // namespace soar
