#include "soar/ddos.hpp"

#include "soar/error.hpp"

namespace soar {

const std::array<const char*, kDdosFeatureCount>& ddos_feature_names() {
  static const std::array<const char*, kDdosFeatureCount> names = {
      "eth_src_occ_100", "eth_dst_occ_100", "ip_src_occ_100", "ip_dst_occ_100",
      "eth_src_occ_1000", "eth_dst_occ_1000", "ip_src_occ_1000", "ip_dst_occ_1000",
      "dt_prev", "dt_10", "dt_100", "dt_1000",
      "proto_code", "src_port", "dst_port", "length"};
  return names;
}

const std::vector<FeatureSpec>& ddos_feature_schema() {
  static const std::vector<FeatureSpec> schema = [] {
    std::vector<FeatureSpec> s;
    for (const char* name : ddos_feature_names()) s.push_back({name, FeatureType::NUMERIC});
    return s;
  }();
  return schema;
}

DdosFeatures LookbackState::update_and_extract(const Packet& p) {
  DdosFeatures f;
  uint64_t eth_src = p.eth_src.key();
  uint64_t eth_dst = p.eth_dst.key();
  uint64_t ip_src = p.ip_src.addr;
  uint64_t ip_dst = p.ip_dst.addr;

  f.v[0] = eth_src_100_.occurrences(eth_src);
  f.v[1] = eth_dst_100_.occurrences(eth_dst);
  f.v[2] = ip_src_100_.occurrences(ip_src);
  f.v[3] = ip_dst_100_.occurrences(ip_dst);
  f.v[4] = eth_src_1000_.occurrences(eth_src);
  f.v[5] = eth_dst_1000_.occurrences(eth_dst);
  f.v[6] = ip_src_1000_.occurrences(ip_src);
  f.v[7] = ip_dst_1000_.occurrences(ip_dst);

  // ts_ keeps the last <=1000 stamps oldest-first; while nothing has been
  // evicted ts_[0] is the first packet of the stream, afterwards it is
  // exactly the 1000th previous packet. Both cases are what dt_m wants.
  size_t k = ts_.size();
  auto dt = [&](size_t m) {
    if (k == 0) return 0.0;
    return k >= m ? p.ts - ts_[k - m] : p.ts - ts_[0];
  };
  f.v[8] = dt(1);
  f.v[9] = dt(10);
  f.v[10] = dt(100);
  f.v[11] = dt(1000);

  f.v[12] = proto_code(p.proto);
  f.v[13] = p.src_port;
  f.v[14] = p.dst_port;
  f.v[15] = p.length;

  eth_src_100_.push(eth_src);
  eth_dst_100_.push(eth_dst);
  ip_src_100_.push(ip_src);
  ip_dst_100_.push(ip_dst);
  eth_src_1000_.push(eth_src);
  eth_dst_1000_.push(eth_dst);
  ip_src_1000_.push(ip_src);
  ip_dst_1000_.push(ip_dst);
  if (ts_.size() == 1000) ts_.erase(ts_.begin());
  ts_.push_back(p.ts);
  return f;
}

bool DdosDetector::process(const Packet& p) {
  if (!model_.trained) throw Error(ErrorCode::UntrainedModel, "ddos model");
  DdosFeatures f = state_.update_and_extract(p);
  processed_++;
  bool positive = model_.predict(std::span<const double>(f.v.data(), f.v.size())) == 1;
  if (positive) positives_++;
  return positive;
}

Dataset ddos_to_dataset(std::span<const DdosFeatures> features, std::span<const int> labels) {
  Dataset ds;
  ds.schema = ddos_feature_schema();
  for (size_t i = 0; i < features.size(); ++i) {
    ds.rows.emplace_back(features[i].v.begin(), features[i].v.end());
    ds.labels.push_back(labels[i]);
  }
  ds.validate();
  return ds;
}

}  // namespace soar
