#include "soar/flow.hpp"

#include <cmath>

#include "soar/error.hpp"

namespace soar {

const char* flow_state_name(FlowState s) {
  switch (s) {
    case FlowState::SYN_ONLY: return "SYN_ONLY";
    case FlowState::ESTABLISHED: return "ESTABLISHED";
    case FlowState::FIN_RST_SEEN: return "FIN_RST_SEEN";
    case FlowState::NON_TCP: return "NON_TCP";
  }
  return "?";
}

namespace {

// FIN/RST dominates, then any ACK, then bare SYN; TCP without flag metadata
// degrades to NON_TCP
void fold_state(FlowRecord& flow, const Packet& p) {
  if (p.proto != Proto::TCP || !p.tcp_flags) return;
  uint8_t flags = *p.tcp_flags;
  if (flags & (kTcpFin | kTcpRst)) {
    flow.state = FlowState::FIN_RST_SEEN;
  } else if (flow.state != FlowState::FIN_RST_SEEN) {
    if (flags & kTcpAck) {
      flow.state = FlowState::ESTABLISHED;
    } else if ((flags & kTcpSyn) && flow.state == FlowState::NON_TCP) {
      flow.state = FlowState::SYN_ONLY;
    }
  }
}

}  // namespace

void FlowAggregator::absorb(const Packet& p) {
  int64_t wid = int64_t(std::floor(p.ts / window_));
  FlowKey key{p.ip_src, p.ip_dst, p.src_port, p.dst_port, p.proto};
  auto [it, fresh] = open_.try_emplace({wid, key});
  FlowRecord& flow = it->second;
  if (fresh) {
    flow.key = key;
    flow.first_ts = p.ts;
    flow.last_ts = p.ts;
    flow.window_id = wid;
    flow.state = FlowState::NON_TCP;
  }
  flow.last_ts = p.ts;
  flow.total_bytes += p.length;
  flow.total_packets += 1;
  fold_state(flow, p);
}

std::vector<FlowRecord> FlowAggregator::close_before(int64_t window_id) {
  std::vector<FlowRecord> closed;
  for (auto it = open_.begin(); it != open_.end();) {
    if (it->first.first < window_id) {
      closed.push_back(it->second);  // map order == (window_id, key) order
      it = open_.erase(it);
    } else {
      ++it;
    }
  }
  return closed;
}

std::vector<FlowRecord> FlowAggregator::feed(const Packet& p) {
  int64_t wid = int64_t(std::floor(p.ts / window_));
  auto closed = close_before(wid);
  absorb(p);
  return closed;
}

std::vector<FlowRecord> FlowAggregator::flush() {
  std::vector<FlowRecord> closed;
  for (auto& [key, flow] : open_) closed.push_back(flow);
  open_.clear();
  return closed;
}

std::vector<FlowRecord> aggregate_flows(std::span<const Packet> packets, double window) {
  FlowAggregator agg(window);
  std::vector<FlowRecord> out;
  for (const Packet& p : packets) {
    auto closed = agg.feed(p);
    out.insert(out.end(), closed.begin(), closed.end());
  }
  auto rest = agg.flush();
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<double> flow_features(const FlowRecord& flow) {
  double duration = flow.duration();
  double bytes = double(flow.total_bytes);
  double pkts = double(flow.total_packets);
  if (duration > 60.0) {  // normalize to per-minute rates for long imports
    bytes = bytes * 60.0 / duration;
    pkts = pkts * 60.0 / duration;
  }
  return {duration,
          flow.key.proto == Proto::TCP ? 1.0 : 0.0,
          flow.key.proto == Proto::UDP ? 1.0 : 0.0,
          flow.key.proto == Proto::ICMP ? 1.0 : 0.0,
          double(flow.key.src_port),
          double(flow.key.dst_port),
          bytes,
          pkts,
          double(uint8_t(flow.state))};
}

Dataset flows_to_dataset(std::span<const FlowRecord> flows, std::span<const int> labels) {
  Dataset ds;
  ds.schema = flow_feature_schema();
  for (size_t i = 0; i < flows.size(); ++i) {
    ds.rows.push_back(flow_features(flows[i]));
    ds.labels.push_back(labels[i]);
  }
  ds.validate();
  return ds;
}

bool classify_flow(const FlowRecord& flow, const ClassifierModel& model) {
  if (!model.trained) throw Error(ErrorCode::UntrainedModel, "botnet model");
  return model.predict(flow_features(flow)) == 1;
}

}  // namespace soar
