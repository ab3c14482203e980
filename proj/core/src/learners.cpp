#include "soar/learners.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "soar/error.hpp"
#include "soar/storage.hpp"

namespace soar {
namespace {

// splitmix64: tiny, stable PRNG for shuffles so results do not depend on any
// standard-library distribution implementation
struct SplitMix {
  uint64_t state;
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  size_t below(size_t n) { return n == 0 ? 0 : size_t(next() % n); }
};

double gini(double w0, double w1) {
  double w = w0 + w1;
  if (w <= 0) return 0.0;
  double p0 = w0 / w, p1 = w1 / w;
  return 1.0 - p0 * p0 - p1 * p1;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void Dataset::validate() const {
  if (rows.size() != labels.size())
    throw Error(ErrorCode::SchemaMismatch, "row/label count mismatch");
  for (const auto& row : rows) {
    if (row.size() != schema.size())
      throw Error(ErrorCode::SchemaMismatch, "row width does not match schema");
  }
  for (int label : labels) {
    if (label != 0 && label != 1)
      throw Error(ErrorCode::SchemaMismatch, "labels must be 0/1");
  }
}

std::string Dataset::schema_fingerprint() const {
  std::string desc;
  for (const auto& f : schema) {
    desc += f.name;
    desc += f.type == FeatureType::NUMERIC ? ":n|" : ":c|";
  }
  return sha256_hex(desc).substr(0, 16);
}

Dataset Dataset::from_csv(const std::filesystem::path& path,
                          const std::set<std::string>& categorical) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  Dataset ds;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoFailure, "empty csv " + path.string());

  std::vector<std::string> header;
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) header.push_back(cell);
  if (header.empty() || header.back() != "label")
    throw Error(ErrorCode::SchemaMismatch, "last csv column must be 'label'");
  for (size_t i = 0; i + 1 < header.size(); ++i) {
    ds.schema.push_back({header[i], categorical.count(header[i]) ? FeatureType::CATEGORICAL
                                                                 : FeatureType::NUMERIC});
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != ds.schema.size() + 1)
      throw Error(ErrorCode::SchemaMismatch, "csv row width mismatch");
    ds.labels.push_back(int(row.back()));
    row.pop_back();
    ds.rows.push_back(std::move(row));
  }
  ds.validate();
  return ds;
}

void Dataset::to_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  for (size_t i = 0; i < schema.size(); ++i) out << schema[i].name << ',';
  out << "label\n";
  char buf[64];
  for (size_t r = 0; r < rows.size(); ++r) {
    for (double v : rows[r]) {
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      out << buf << ',';
    }
    out << labels[r] << '\n';
  }
}

std::array<double, 2> class_weights(std::span<const int> labels) {
  double counts[2] = {0, 0};
  for (int label : labels) counts[label == 1 ? 1 : 0] += 1.0;
  if (counts[0] == 0 || counts[1] == 0)
    throw Error(ErrorCode::SingleClass, "both classes required");
  double n = counts[0] + counts[1];
  return {n / (2.0 * counts[0]), n / (2.0 * counts[1])};
}

std::string Metrics::table() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "accuracy   %8.4f %%\n"
                "precision  %8.4f %%%s\n"
                "recall     %8.4f %%%s\n"
                "f-score    %8.4f %%%s\n"
                "confusion  tp=%ld fp=%ld fn=%ld tn=%ld\n",
                accuracy, precision, precision_defined ? "" : "  (undefined: no positives)",
                recall, recall_defined ? "" : "  (undefined: no actual positives)", f_score,
                f_defined ? "" : "  (undefined)", tp, fp, fn, tn);
  return buf;
}

// ---------------------------------------------------------------------------
// decision tree

namespace {

struct TreeBuilder {
  const Dataset& ds;
  std::array<double, 2> cw;
  TreeParams params;
  std::vector<TreeNode> nodes;

  double row_weight(size_t r) const { return cw[ds.labels[r] == 1 ? 1 : 0]; }

  int build(std::vector<size_t>& idx, int depth) {
    double w0 = 0, w1 = 0;
    for (size_t r : idx) (ds.labels[r] == 1 ? w1 : w0) += row_weight(r);
    double node_gini = gini(w0, w1);

    int node_id = int(nodes.size());
    nodes.emplace_back();
    nodes[node_id].weighted_counts = {w0, w1};
    nodes[node_id].prediction = w1 > w0 ? 1 : 0;

    if (node_gini <= 0.0 || depth >= params.depth_cap ||
        idx.size() < size_t(2 * params.min_leaf))
      return node_id;

    // exact greedy scan: features in schema order, thresholds ascending,
    // strictly-better score wins so the first best split is kept
    int best_feature = -1;
    double best_threshold = 0, best_score = node_gini;
    double total_w = w0 + w1;

    std::vector<std::pair<double, size_t>> order(idx.size());
    for (int f = 0; f < int(ds.schema.size()); ++f) {
      for (size_t i = 0; i < idx.size(); ++i) order[i] = {ds.rows[idx[i]][size_t(f)], idx[i]};
      std::sort(order.begin(), order.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      double lw0 = 0, lw1 = 0;
      size_t left_n = 0;
      for (size_t i = 0; i + 1 < order.size(); ++i) {
        size_t r = order[i].second;
        (ds.labels[r] == 1 ? lw1 : lw0) += row_weight(r);
        left_n++;
        if (order[i].first == order[i + 1].first) continue;  // not a value boundary
        size_t right_n = order.size() - left_n;
        if (left_n < size_t(params.min_leaf) || right_n < size_t(params.min_leaf)) continue;
        double rw0 = w0 - lw0, rw1 = w1 - lw1;
        double score =
            ((lw0 + lw1) * gini(lw0, lw1) + (rw0 + rw1) * gini(rw0, rw1)) / total_w;
        if (score < best_score - 1e-12) {
          best_score = score;
          best_feature = f;
          best_threshold = (order[i].first + order[i + 1].first) / 2.0;
        }
      }
    }

    if (best_feature < 0) return node_id;  // no informative split

    std::vector<size_t> left, right;
    for (size_t r : idx) {
      (ds.rows[r][size_t(best_feature)] <= best_threshold ? left : right).push_back(r);
    }
    nodes[node_id].feature = best_feature;
    nodes[node_id].threshold = best_threshold;
    int l = build(left, depth + 1);
    int r = build(right, depth + 1);
    nodes[node_id].left = l;
    nodes[node_id].right = r;
    return node_id;
  }
};

}  // namespace

ClassifierModel train_tree(const Dataset& ds, std::array<double, 2> weights, TreeParams params) {
  ds.validate();
  bool has0 = false, has1 = false;
  for (int label : ds.labels) (label == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw Error(ErrorCode::SingleClass, "training needs both classes");

  TreeBuilder builder{ds, weights, params, {}};
  std::vector<size_t> all(ds.rows.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  builder.build(all, 0);

  ClassifierModel model;
  model.family = ModelFamily::DECISION_TREE;
  model.schema = ds.schema;
  model.fingerprint = ds.schema_fingerprint();
  model.class_weights = weights;
  model.nodes = std::move(builder.nodes);
  model.trained = true;
  return model;
}

// ---------------------------------------------------------------------------
// logistic regression

double logistic_loss_grad(const std::vector<std::vector<double>>& x, std::span<const int> y,
                          std::span<const double> sample_weights, std::span<const double> w,
                          double bias, std::span<double> grad_w, double& grad_bias) {
  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_bias = 0.0;
  double loss = 0.0, total_w = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double sw = sample_weights[i];
    total_w += sw;
    double z = bias;
    for (size_t f = 0; f < w.size(); ++f) z += w[f] * x[i][f];
    double p = sigmoid(z);
    double yi = y[i] == 1 ? 1.0 : 0.0;
    loss -= sw * (yi * std::log(p) + (1.0 - yi) * std::log(1.0 - p));
    double d = sw * (p - yi);
    for (size_t f = 0; f < w.size(); ++f) grad_w[f] += d * x[i][f];
    grad_bias += d;
  }
  if (total_w > 0) {
    loss /= total_w;
    for (double& g : grad_w) g /= total_w;
    grad_bias /= total_w;
  }
  return loss;
}

namespace {

// expanded design matrix: scaled numerics followed by categorical one-hot
// blocks, layout recorded in the model for inference
std::vector<double> expand_row(const ClassifierModel& m, std::span<const double> row) {
  std::vector<double> out;
  for (size_t f = 0; f < m.schema.size(); ++f) {
    if (m.schema[f].type == FeatureType::NUMERIC) {
      double lo = m.scale_min[f], hi = m.scale_max[f];
      out.push_back(hi > lo ? (row[f] - lo) / (hi - lo) : 0.0);
    } else {
      for (double code : m.category_values[f]) out.push_back(row[f] == code ? 1.0 : 0.0);
    }
  }
  return out;
}

}  // namespace

ClassifierModel train_logistic(const Dataset& ds, std::array<double, 2> weights,
                               LogisticParams params) {
  ds.validate();
  double wsum[2] = {0, 0};
  for (int label : ds.labels) wsum[label == 1 ? 1 : 0] += weights[label == 1 ? 1 : 0];
  if (wsum[0] == 0 || wsum[1] == 0)
    throw Error(ErrorCode::SingleClass, "training needs both classes");

  ClassifierModel model;
  model.family = ModelFamily::LOGISTIC_REGRESSION;
  model.schema = ds.schema;
  model.fingerprint = ds.schema_fingerprint();
  model.class_weights = weights;
  model.scale_min.assign(ds.schema.size(), 0.0);
  model.scale_max.assign(ds.schema.size(), 0.0);
  model.category_values.assign(ds.schema.size(), {});

  for (size_t f = 0; f < ds.schema.size(); ++f) {
    if (ds.schema[f].type == FeatureType::NUMERIC) {
      double lo = ds.rows.empty() ? 0.0 : ds.rows[0][f], hi = lo;
      for (const auto& row : ds.rows) {
        lo = std::min(lo, row[f]);
        hi = std::max(hi, row[f]);
      }
      model.scale_min[f] = lo;
      model.scale_max[f] = hi;
    } else {
      std::vector<double> codes;
      for (const auto& row : ds.rows) codes.push_back(row[f]);
      std::sort(codes.begin(), codes.end());
      codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
      model.category_values[f] = std::move(codes);
    }
  }

  std::vector<std::vector<double>> x;
  x.reserve(ds.rows.size());
  for (const auto& row : ds.rows) x.push_back(expand_row(model, row));
  size_t dim = x.empty() ? 0 : x[0].size();

  std::vector<double> sample_w(ds.rows.size());
  for (size_t i = 0; i < ds.rows.size(); ++i) sample_w[i] = weights[ds.labels[i] == 1 ? 1 : 0];

  std::vector<double> w(dim, 0.0);
  double bias = std::log(wsum[1] / wsum[0]);  // weighted log-odds
  std::vector<double> grad(dim, 0.0);
  double grad_bias = 0.0;

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    double loss = logistic_loss_grad(x, ds.labels, sample_w, w, bias, grad, grad_bias);
    if (!std::isfinite(loss))
      throw Error(ErrorCode::NonFiniteLoss, "diverged at epoch " + std::to_string(epoch) +
                                                "; lower the learning rate");
    for (size_t f = 0; f < dim; ++f) w[f] -= params.learning_rate * grad[f];
    bias -= params.learning_rate * grad_bias;
    if (!std::isfinite(bias))
      throw Error(ErrorCode::NonFiniteLoss, "diverged; lower the learning rate");
  }
  // final sanity pass so a last-step explosion is not silently kept
  double final_loss = logistic_loss_grad(x, ds.labels, sample_w, w, bias, grad, grad_bias);
  if (!std::isfinite(final_loss))
    throw Error(ErrorCode::NonFiniteLoss, "diverged; lower the learning rate");

  model.lr_weights = std::move(w);
  model.lr_bias = bias;
  model.trained = true;
  return model;
}

int ClassifierModel::predict(std::span<const double> row) const {
  if (!trained) throw Error(ErrorCode::UntrainedModel, "predict on untrained model");
  if (row.size() != schema.size())
    throw Error(ErrorCode::SchemaMismatch, "row width does not match model schema");
  if (family == ModelFamily::DECISION_TREE) {
    int node = 0;
    while (!nodes[size_t(node)].is_leaf()) {
      const TreeNode& n = nodes[size_t(node)];
      node = row[size_t(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[size_t(node)].prediction;
  }
  std::vector<double> ex = expand_row(*this, row);
  double z = lr_bias;
  for (size_t f = 0; f < ex.size(); ++f) z += lr_weights[f] * ex[f];
  return sigmoid(z) >= 0.5 ? 1 : 0;
}

Metrics evaluate(const ClassifierModel& model, const Dataset& ds) {
  if (!model.trained) throw Error(ErrorCode::UntrainedModel, "evaluate on untrained model");
  ds.validate();
  if (ds.schema_fingerprint() != model.fingerprint)
    throw Error(ErrorCode::SchemaMismatch, "dataset schema does not match model");

  Metrics m;
  for (size_t i = 0; i < ds.rows.size(); ++i) {
    int pred = model.predict(ds.rows[i]);
    int truth = ds.labels[i];
    if (pred == 1 && truth == 1) m.tp++;
    else if (pred == 1 && truth == 0) m.fp++;
    else if (pred == 0 && truth == 1) m.fn++;
    else m.tn++;
  }
  long n = m.tp + m.fp + m.fn + m.tn;
  m.accuracy = n > 0 ? 100.0 * double(m.tp + m.tn) / double(n) : 0.0;
  if (m.tp + m.fp > 0) {
    m.precision = 100.0 * double(m.tp) / double(m.tp + m.fp);
  } else {
    m.precision = 0.0;
    m.precision_defined = false;
  }
  if (m.tp + m.fn > 0) {
    m.recall = 100.0 * double(m.tp) / double(m.tp + m.fn);
  } else {
    m.recall = 0.0;
    m.recall_defined = false;
  }
  if (m.precision + m.recall > 0) {
    m.f_score = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f_score = 0.0;
    m.f_defined = false;
  }
  return m;
}

// ---------------------------------------------------------------------------
// model serialization (versioned, fixed field order)

void ClassifierModel::save_json(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["family"] = family == ModelFamily::DECISION_TREE ? "tree" : "lr";
  nlohmann::ordered_json schema_json = nlohmann::ordered_json::array();
  for (const auto& f : schema) {
    schema_json.push_back({{"name", f.name},
                           {"type", f.type == FeatureType::NUMERIC ? "numeric" : "categorical"}});
  }
  j["schema"] = std::move(schema_json);
  j["fingerprint"] = fingerprint;
  j["class_weights"] = class_weights;
  if (family == ModelFamily::DECISION_TREE) {
    nlohmann::ordered_json nodes_json = nlohmann::ordered_json::array();
    for (const auto& n : nodes) {
      nodes_json.push_back({{"feature", n.feature},
                            {"threshold", n.threshold},
                            {"left", n.left},
                            {"right", n.right},
                            {"prediction", n.prediction},
                            {"w0", n.weighted_counts[0]},
                            {"w1", n.weighted_counts[1]}});
    }
    j["tree"] = std::move(nodes_json);
  } else {
    j["lr"] = {{"weights", lr_weights},
               {"bias", lr_bias},
               {"scale_min", scale_min},
               {"scale_max", scale_max},
               {"category_values", category_values}};
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ClassifierModel ClassifierModel::load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoFailure, "bad model json: " + std::string(e.what()));
  }
  ClassifierModel m;
  std::string fam = j.at("family").get<std::string>();
  m.family = fam == "tree" ? ModelFamily::DECISION_TREE : ModelFamily::LOGISTIC_REGRESSION;
  for (const auto& f : j.at("schema")) {
    m.schema.push_back({f.at("name").get<std::string>(),
                        f.at("type").get<std::string>() == "numeric" ? FeatureType::NUMERIC
                                                                     : FeatureType::CATEGORICAL});
  }
  m.fingerprint = j.at("fingerprint").get<std::string>();
  auto cw = j.at("class_weights");
  m.class_weights = {cw[0].get<double>(), cw[1].get<double>()};
  if (m.family == ModelFamily::DECISION_TREE) {
    for (const auto& n : j.at("tree")) {
      TreeNode node;
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
      node.prediction = n.at("prediction").get<int>();
      node.weighted_counts = {n.at("w0").get<double>(), n.at("w1").get<double>()};
      m.nodes.push_back(node);
    }
  } else {
    const auto& lr = j.at("lr");
    m.lr_weights = lr.at("weights").get<std::vector<double>>();
    m.lr_bias = lr.at("bias").get<double>();
    m.scale_min = lr.at("scale_min").get<std::vector<double>>();
    m.scale_max = lr.at("scale_max").get<std::vector<double>>();
    m.category_values = lr.at("category_values").get<std::vector<std::vector<double>>>();
  }
  m.trained = true;
  return m;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             uint64_t seed) {
  std::vector<size_t> idx(ds.rows.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  SplitMix rng{seed ^ 0xc2b2ae3d27d4eb4fULL};
  for (size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);

  size_t test_n = size_t(double(idx.size()) * test_fraction);
  Dataset train, test;
  train.schema = test.schema = ds.schema;
  for (size_t i = 0; i < idx.size(); ++i) {
    Dataset& dst = i < test_n ? test : train;
    dst.rows.push_back(ds.rows[idx[i]]);
    dst.labels.push_back(ds.labels[idx[i]]);
  }
  return {std::move(train), std::move(test)};
}

std::vector<std::vector<size_t>> kfold_indices(size_t n, int k, uint64_t seed) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  SplitMix rng{seed ^ 0x9e3779b97f4a7c15ULL};
  for (size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  std::vector<std::vector<size_t>> folds(size_t(std::max(1, k)));
  for (size_t i = 0; i < n; ++i) folds[i % folds.size()].push_back(idx[i]);
  return folds;
}

}  // namespace soar
