#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "soar/learners.hpp"
#include "soar/packet.hpp"

namespace soar {

inline constexpr size_t kDdosFeatureCount = 16;

const std::array<const char*, kDdosFeatureCount>& ddos_feature_names();
const std::vector<FeatureSpec>& ddos_feature_schema();

/// The 16 per-packet features, fixed order: address occurrence lookbacks over
/// the last 100 and 1000 packets, timestamp deltas to the 1st/10th/100th/
/// 1000th previous packet, then protocol code, ports and length.
struct DdosFeatures {
  std::array<double, kDdosFeatureCount> v{};

  double eth_src_occ_100() const { return v[0]; }
  double eth_dst_occ_100() const { return v[1]; }
  double ip_src_occ_100() const { return v[2]; }
  double ip_dst_occ_100() const { return v[3]; }
  double eth_src_occ_1000() const { return v[4]; }
  double eth_dst_occ_1000() const { return v[5]; }
  double ip_src_occ_1000() const { return v[6]; }
  double ip_dst_occ_1000() const { return v[7]; }
  double dt_prev() const { return v[8]; }
  double dt_10() const { return v[9]; }
  double dt_100() const { return v[10]; }
  double dt_1000() const { return v[11]; }
};

/// Occurrence-lookback ring buffers plus timestamp history. Counter maps keep
/// the occurrence queries O(1); they always agree with a brute-force recount
/// of the ring contents. Features are computed over the history BEFORE the
/// current packet is inserted, so the packet never counts itself and the
/// first packet of a stream is all zeros.
class LookbackState {
 public:
  /// Missing-history rule: with k < n prior packets the occurrence lookback
  /// counts over the k available; dt_m with fewer than m prior packets is
  /// ts - first packet ts, and 0 for the very first packet.
  DdosFeatures update_and_extract(const Packet& p);

  size_t history_size() const { return ts_.size(); }

 private:
  // one address ring + counter per (field, window)
  struct Window {
    explicit Window(size_t capacity) : cap(capacity) {}
    size_t cap;
    std::vector<uint64_t> ring;
    size_t head = 0;
    std::unordered_map<uint64_t, uint32_t> counts;

    uint32_t occurrences(uint64_t key) const {
      auto it = counts.find(key);
      return it == counts.end() ? 0 : it->second;
    }
    void push(uint64_t key) {
      if (ring.size() == cap) {
        uint64_t old = ring[head];
        auto it = counts.find(old);
        if (--it->second == 0) counts.erase(it);
        ring[head] = key;
        head = (head + 1) % cap;
      } else {
        ring.push_back(key);
      }
      counts[key]++;
    }
  };

  Window eth_src_100_{100}, eth_dst_100_{100}, ip_src_100_{100}, ip_dst_100_{100};
  Window eth_src_1000_{1000}, eth_dst_1000_{1000}, ip_src_1000_{1000}, ip_dst_1000_{1000};
  std::vector<double> ts_;  // last <=1000 timestamps, oldest first
};

/// Per-interface detector: extract, classify, count.
class DdosDetector {
 public:
  explicit DdosDetector(ClassifierModel model) : model_(std::move(model)) {}

  /// Returns true when the packet classifies as DDOS; throws UntrainedModel.
  bool process(const Packet& p);

  uint64_t positives() const { return positives_; }
  uint64_t processed() const { return processed_; }

 private:
  LookbackState state_;
  ClassifierModel model_;
  uint64_t positives_ = 0;
  uint64_t processed_ = 0;
};

Dataset ddos_to_dataset(std::span<const DdosFeatures> features, std::span<const int> labels);

}  // namespace soar
