#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace soar {

enum class FeatureType : uint8_t { NUMERIC, CATEGORICAL };

struct FeatureSpec {
  std::string name;
  FeatureType type = FeatureType::NUMERIC;

  bool operator==(const FeatureSpec&) const = default;
};

/// Labeled binary dataset. Rows match the schema positionally; categorical
/// features are stored as integer codes.
struct Dataset {
  std::vector<FeatureSpec> schema;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;  // 0/1

  void validate() const;
  std::string schema_fingerprint() const;

  static Dataset from_csv(const std::filesystem::path& path,
                          const std::set<std::string>& categorical = {});
  void to_csv(const std::filesystem::path& path) const;
};

/// Balanced scheme: weight_c = N / (2 * count_c). Throws SingleClass.
std::array<double, 2> class_weights(std::span<const int> labels);

struct Metrics {
  double accuracy = 0.0;   // percentages
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  long tp = 0, fp = 0, fn = 0, tn = 0;
  bool precision_defined = true;
  bool recall_defined = true;
  bool f_defined = true;

  std::string table() const;  // human-readable metric table
};

struct TreeNode {
  int feature = -1;  // -1 for leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int prediction = 0;
  std::array<double, 2> weighted_counts{0.0, 0.0};

  bool is_leaf() const { return feature < 0; }
};

struct TreeParams {
  int depth_cap = 12;
  int min_leaf = 5;
};

struct LogisticParams {
  int epochs = 500;
  double learning_rate = 0.5;
};

enum class ModelFamily : uint8_t { DECISION_TREE, LOGISTIC_REGRESSION };

struct ClassifierModel {
  ModelFamily family = ModelFamily::DECISION_TREE;
  std::vector<FeatureSpec> schema;
  std::string fingerprint;
  std::array<double, 2> class_weights{1.0, 1.0};
  bool trained = false;

  // decision tree
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  // logistic regression over the expanded (scaled numeric + one-hot
  // categorical) feature space
  std::vector<double> lr_weights;
  double lr_bias = 0.0;
  std::vector<double> scale_min, scale_max;          // per raw feature; unused for categorical
  std::vector<std::vector<double>> category_values;  // observed codes per categorical feature

  int predict(std::span<const double> row) const;  // throws UntrainedModel

  void save_json(const std::filesystem::path& path) const;
  static ClassifierModel load_json(const std::filesystem::path& path);
};

/// Greedy CART with weighted Gini impurity. Deterministic: features scanned
/// in schema order, thresholds at midpoints of sorted unique values,
/// first-best split wins ties.
ClassifierModel train_tree(const Dataset& ds, std::array<double, 2> weights,
                           TreeParams params = {});

/// Full-batch gradient descent on weighted log-loss with min-max scaling to
/// [0,1]; bias starts at the weighted log-odds so a zero-epoch model predicts
/// the weighted majority class. Throws NonFiniteLoss on divergence.
ClassifierModel train_logistic(const Dataset& ds, std::array<double, 2> weights,
                               LogisticParams params = {});

/// Confusion-matrix metrics; undefined ratios reported as 0 with the flag
/// cleared. Throws SchemaMismatch when the dataset does not match the model.
Metrics evaluate(const ClassifierModel& model, const Dataset& ds);

/// Loss and gradient of the weighted logistic objective on an explicit
/// design matrix; exposed so the gradient can be checked against finite
/// differences.
double logistic_loss_grad(const std::vector<std::vector<double>>& x, std::span<const int> y,
                          std::span<const double> sample_weights, std::span<const double> w,
                          double bias, std::span<double> grad_w, double& grad_bias);

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             uint64_t seed);
std::vector<std::vector<size_t>> kfold_indices(size_t n, int k, uint64_t seed);

}  // namespace soar
