#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "soar/catalog.hpp"
#include "soar/learners.hpp"
#include "soar/packet.hpp"

namespace soar {

/// Ordered literal-substring feature list for one attack class, with the
/// exclusion list applied at construction. Token lists are versioned and
/// config-replaceable; only the exclusions are contractual.
struct TokenFeatureSpec {
  AttackLabel attack;
  std::vector<std::string> tokens;    // counted, lowercase
  std::vector<std::string> excluded;  // never allowed into `tokens`
  int version = 1;

  void validate() const;  // throws ConfigInvalid when excluded ∩ tokens != ∅

  void save_json(const std::filesystem::path& path) const;
  static TokenFeatureSpec load_json(const std::filesystem::path& path);
};

/// Built-in token lists (version 1) honoring the per-class exclusions.
TokenFeatureSpec default_token_spec(AttackLabel attack);

struct HttpFeatureVector {
  AttackLabel attack;
  std::vector<int> counts;  // one per token, spec order
};

/// One URL-percent-decode pass ('%hh' only; '+' is left alone); invalid
/// escapes pass through verbatim.
std::string url_decode_once(std::string_view raw);

/// counts[k] = non-overlapping, case-insensitive occurrences of tokens[k] in
/// the decoded raw request. Pure function.
HttpFeatureVector extract_http_features(const HttpRequest& req, const TokenFeatureSpec& spec);

Dataset feature_vectors_to_dataset(std::span<const HttpFeatureVector> vectors,
                                   std::span<const int> labels);

/// Three independent binary classifiers; a request can carry several labels.
class HttpIds {
 public:
  HttpIds();

  void set_model(AttackLabel attack, ClassifierModel model);
  void set_spec(AttackLabel attack, TokenFeatureSpec spec);
  const TokenFeatureSpec& spec(AttackLabel attack) const;
  const ClassifierModel& model(AttackLabel attack) const;
  bool trained() const;

  /// Returns the set of positive labels; throws UntrainedModel.
  std::set<AttackLabel> classify(const HttpRequest& req) const;

 private:
  std::array<TokenFeatureSpec, 3> specs_;
  std::array<ClassifierModel, 3> models_;
};

}  // namespace soar
