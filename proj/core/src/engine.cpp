#include "soar/engine.hpp"

#include <algorithm>
#include <cmath>

#include "soar/scenario.hpp"

namespace soar {

EngineModels default_models(uint64_t seed) {
  EngineModels models;
  for (auto a : {AttackLabel::SQLI, AttackLabel::XSS, AttackLabel::OSC}) {
    Dataset ds = gen_httpids_corpus(a, seed, 400, 400);
    models.http.set_model(a, train_tree(ds, class_weights(ds.labels)));
  }
  Dataset flows = gen_botnet_corpus(seed, 600, 600);
  models.botnet = train_tree(flows, class_weights(flows.labels));
  Dataset ddos = gen_ddos_corpus(seed, 1500, 1500);
  models.ddos = train_tree(ddos, class_weights(ddos.labels));
  return models;
}

Engine::Engine(ReservedIpPool pool, Catalog catalog, Options options, Backend& backend,
               const EngineModels& models, MalwareVault& vault)
    : options_(options),
      backend_(backend),
      models_(models),
      vault_(vault),
      orch_(std::move(pool), std::move(catalog),
            OrchestratorOptions{options.idle_timeout, options.deploy_ahead, options.static_mode},
            [this](const HoneypotTemplate& tmpl, Ipv4 ip, const std::string& id, double ts) {
              try {
                return backend_.start(tmpl, ip, id, ts);
              } catch (const Error& e) {
                return StartOutcome{false, 0.0, error_code_name(e.code())};
              }
            },
            [this](const std::string& id, double ts) {
              try {
                return backend_.stop_with_backup(id, ts);
              } catch (const Error& e) {
                return StopOutcome{false, "", 0, error_code_name(e.code())};
              }
            }),
      ddos_(models.ddos) {
  for (const auto& t : orch_.catalog().templates()) {
    if (t.is_http()) http_ports_.insert(t.port);
    ledger_.register_template(service_name(t.service));
  }
}

void Engine::append(Event e) {
  e.seq = next_seq_++;
  events_.push_back(std::move(e));
}

void Engine::append(std::vector<Event> events) {
  for (Event& e : events) append(std::move(e));
}

void Engine::begin(double t0) {
  if (options_.static_mode) append(orch_.deploy_static_all(t0));
}

void Engine::run_due_reaps(double upto) {
  for (;;) {
    auto due = orch_.next_reap_due();
    if (!due || *due > upto) break;
    auto events = orch_.reap_idle(*due);
    if (events.empty()) break;  // nothing actually reapable yet
    append(std::move(events));
  }
}

void Engine::close_flows(std::vector<FlowRecord> closed, double notify_cap) {
  for (const FlowRecord& flow : closed) {
    if (!options_.detectors.botnet) continue;
    if (!classify_flow(flow, models_.botnet)) continue;
    counters_.botnet_flows++;
    double ts = std::min(double(flow.window_id + 1) * flows_.window(), notify_cap);
    Event e;
    e.ts = ts;
    e.kind = EventKind::NOTIFY;
    e.detail.emplace_back("reason", "botnet-flow");
    e.detail.emplace_back("src", flow.key.src.str());
    e.detail.emplace_back("dst", flow.key.dst.str());
    e.detail.emplace_back("window", std::to_string(flow.window_id));
    if (const HoneypotInstance* inst = orch_.instance_at(flow.key.dst))
      counters_.attacks_by_template[service_name(inst->tmpl.service)]++;
    append(std::move(e));
  }
}

void Engine::on_packet(const Packet& p) {
  counters_.total_packets++;
  end_ts_ = std::max(end_ts_, p.ts);
  if (!is_reserved_target(p, orch_.pool())) return;
  counters_.reserved_packets++;

  // pending reaps and window closes happen strictly before this packet
  run_due_reaps(p.ts);
  close_flows(flows_.feed(p), p.ts);
  orch_.advance_to(p.ts);

  if (options_.detectors.ddos) {
    if (ddos_.process(p)) {
      counters_.ddos_packets++;
      Event e;
      e.ts = p.ts;
      e.kind = EventKind::NOTIFY;
      e.detail.emplace_back("reason", "ddos-packet");
      e.detail.emplace_back("src", p.ip_src.str());
      e.detail.emplace_back("dst", p.ip_dst.str());
      if (const HoneypotInstance* inst = orch_.instance_at(p.ip_dst))
        counters_.attacks_by_template[service_name(inst->tmpl.service)]++;
      append(std::move(e));
    }
  }

  // interaction with a live, activated decoy counts toward engagement
  if (const HoneypotInstance* inst = orch_.instance_at(p.ip_dst)) {
    if (p.ts >= inst->active_at)
      engagement_points_.push_back({p.ts, p.ip_src, inst->id});
  }

  append(orch_.on_packet(p));

  if (options_.detectors.http_ids && !p.payload.empty() && http_ports_.count(p.dst_port)) {
    const HoneypotInstance* inst = orch_.instance_at(p.ip_dst);
    if (inst && inst->tmpl.is_http() && inst->tmpl.port == p.dst_port &&
        p.ts >= inst->active_at) {
      for (const HttpRequest& req : http_.feed(p)) {
        auto labels = models_.http.classify(req);
        for (AttackLabel label : labels) {
          counters_.ids_alerts++;
          counters_.alerts_by_label[attack_label_name(label)]++;
          counters_.attacks_by_template[service_name(inst->tmpl.service)]++;
          append(orch_.on_ids_alert(label, p.ip_dst, p.ip_src, p.ts));
        }
      }
    }
  }
}

void Engine::on_file_planted(const std::string& instance_id, const std::string& path,
                             const std::string& bytes, double ts) {
  auto* sim = dynamic_cast<SimulatedBackend*>(&backend_);
  if (!sim || !sim->is_running(instance_id)) return;
  sim->plant_file(instance_id, path, bytes, ts);

  const auto& sample = vault_.store_sample(
      std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()), ts,
      instance_id, path);
  Event e;
  e.ts = ts;
  e.kind = EventKind::NOTIFY;
  e.instance = instance_id;
  e.detail.emplace_back("reason", "malware-sample");
  e.detail.emplace_back("path", path);
  e.detail.emplace_back("sha256", sample.sha256);
  e.detail.emplace_back("size", std::to_string(bytes.size()));
  append(std::move(e));
}

void Engine::finish(double end_ts) {
  if (finished_) return;
  finished_ = true;
  end_ts_ = std::max(end_ts_, end_ts);

  run_due_reaps(end_ts_);
  close_flows(flows_.flush(), end_ts_);
  // trailing partial HTTP data is flushed but carries no new alerts: a live
  // decoy for it may already be gone; keep shutdown side-effect free

  for (const auto& [id, inst] : orch_.instances()) {
    double end = inst.stage == InstanceStage::REAPED ? inst.reaped_at : end_ts_;
    ledger_.add_interval(service_name(inst.tmpl.service), inst.ip, inst.deployed_at, end);
  }
}

}  // namespace soar
