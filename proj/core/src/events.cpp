#include "soar/events.hpp"

#include <charconv>
#include <cstdlib>

#include <json.hpp>

#include "soar/error.hpp"

namespace soar {

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::DEPLOY: return "DEPLOY";
    case EventKind::TOUCH: return "TOUCH";
    case EventKind::REAP: return "REAP";
    case EventKind::ALERT_FOLLOWUP: return "ALERT_FOLLOWUP";
    case EventKind::NOTIFY: return "NOTIFY";
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(const std::string& name) {
  for (auto k : {EventKind::DEPLOY, EventKind::TOUCH, EventKind::REAP, EventKind::ALERT_FOLLOWUP,
                 EventKind::NOTIFY}) {
    if (name == event_kind_name(k)) return k;
  }
  return std::nullopt;
}

const std::string* Event::detail_get(const std::string& key) const {
  for (const auto& [k, v] : detail) {
    if (k == key) return &v;
  }
  return nullptr;
}

double Event::detail_num(const std::string& key, double fallback) const {
  const std::string* v = detail_get(key);
  if (!v) return fallback;
  return std::strtod(v->c_str(), nullptr);
}

std::string format_ts(double ts) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), ts);
  (void)ec;
  return std::string(buf, end);
}

std::string event_to_jsonl(const Event& e) {
  nlohmann::ordered_json j;
  j["seq"] = e.seq;
  j["ts"] = e.ts;
  j["kind"] = event_kind_name(e.kind);
  if (!e.instance.empty()) j["instance"] = e.instance;
  if (!e.tmpl.empty()) j["template"] = e.tmpl;
  if (!e.ip.empty()) j["ip"] = e.ip;
  nlohmann::ordered_json d = nlohmann::ordered_json::object();
  for (const auto& [k, v] : e.detail) d[k] = v;
  j["detail"] = std::move(d);
  return j.dump();
}

Event event_from_jsonl(const std::string& line) {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(line, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::IoFailure, "bad event line: " + line);
  Event e;
  e.seq = j.at("seq").get<uint64_t>();
  e.ts = j.at("ts").get<double>();
  auto kind = parse_event_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorCode::IoFailure, "bad event kind");
  e.kind = *kind;
  if (j.contains("instance")) e.instance = j["instance"].get<std::string>();
  if (j.contains("template")) e.tmpl = j["template"].get<std::string>();
  if (j.contains("ip")) e.ip = j["ip"].get<std::string>();
  if (j.contains("detail")) {
    for (auto it = j["detail"].begin(); it != j["detail"].end(); ++it)
      e.detail.emplace_back(it.key(), it.value().get<std::string>());
  }
  return e;
}

}  // namespace soar
