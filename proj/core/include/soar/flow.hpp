#pragma once

#include <compare>
#include <map>
#include <span>
#include <vector>

#include "soar/learners.hpp"
#include "soar/packet.hpp"

namespace soar {

/// Directional 5-tuple: (A→B) and (B→A) are distinct flows.
struct FlowKey {
  Ipv4 src, dst;
  uint16_t src_port = 0, dst_port = 0;
  Proto proto = Proto::OTHER;

  auto operator<=>(const FlowKey&) const = default;
};

enum class FlowState : uint8_t { SYN_ONLY = 0, ESTABLISHED = 1, FIN_RST_SEEN = 2, NON_TCP = 3 };

const char* flow_state_name(FlowState s);

/// One 60-second netflow aggregate.
struct FlowRecord {
  FlowKey key;
  double first_ts = 0.0, last_ts = 0.0;
  uint64_t total_bytes = 0;
  uint64_t total_packets = 0;
  FlowState state = FlowState::NON_TCP;
  int64_t window_id = 0;

  double duration() const { return last_ts - first_ts; }
};

/// Partitions a timestamp-ordered stream by (window, key); windows tumble,
/// aligned to the stream epoch. Output ordered by (window_id, key).
std::vector<FlowRecord> aggregate_flows(std::span<const Packet> packets, double window = 60.0);

/// Staged variant: feeding a packet whose window is past some open flows
/// closes and returns them (ordered); flush() drains the rest.
class FlowAggregator {
 public:
  explicit FlowAggregator(double window = 60.0) : window_(window) {}

  std::vector<FlowRecord> feed(const Packet& p);
  std::vector<FlowRecord> flush();
  double window() const { return window_; }

 private:
  void absorb(const Packet& p);
  std::vector<FlowRecord> close_before(int64_t window_id);

  double window_;
  std::map<std::pair<int64_t, FlowKey>, FlowRecord> open_;
};

inline const std::vector<FeatureSpec>& flow_feature_schema() {
  static const std::vector<FeatureSpec> schema = {
      {"duration", FeatureType::NUMERIC},     {"proto_tcp", FeatureType::NUMERIC},
      {"proto_udp", FeatureType::NUMERIC},    {"proto_icmp", FeatureType::NUMERIC},
      {"src_port", FeatureType::NUMERIC},     {"dst_port", FeatureType::NUMERIC},
      {"bytes_per_min", FeatureType::NUMERIC}, {"pkts_per_min", FeatureType::NUMERIC},
      {"state", FeatureType::CATEGORICAL},
  };
  return schema;
}

/// Feature row in flow_feature_schema() order. Totals are normalized to
/// per-minute rates only when the span exceeds one minute, else kept raw.
std::vector<double> flow_features(const FlowRecord& flow);

Dataset flows_to_dataset(std::span<const FlowRecord> flows, std::span<const int> labels);

/// Deterministic per-flow verdict; throws UntrainedModel / SchemaMismatch.
bool classify_flow(const FlowRecord& flow, const ClassifierModel& model);

}  // namespace soar
