#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace soar {

enum class EventKind : uint8_t { DEPLOY, TOUCH, REAP, ALERT_FOLLOWUP, NOTIFY };

const char* event_kind_name(EventKind k);
std::optional<EventKind> parse_event_kind(const std::string& name);

/// Append-only engine event, totally ordered by (ts, seq). `detail` is an
/// ordered key/value list; values are pre-formatted strings so the wire
/// encoding is byte-stable.
struct Event {
  uint64_t seq = 0;
  double ts = 0.0;
  EventKind kind = EventKind::NOTIFY;
  std::string instance;  // empty when not instance-scoped
  std::string tmpl;      // template (service) name
  std::string ip;        // dotted quad, empty when not applicable
  std::vector<std::pair<std::string, std::string>> detail;

  const std::string* detail_get(const std::string& key) const;
  double detail_num(const std::string& key, double fallback = 0.0) const;
};

/// Fixed-field-order JSON object, one per line.
std::string event_to_jsonl(const Event& e);
Event event_from_jsonl(const std::string& line);

std::string format_ts(double ts);  // shortest round-trip decimal

}  // namespace soar
