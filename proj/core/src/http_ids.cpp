#include "soar/http_ids.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "soar/error.hpp"

namespace soar {
namespace {

int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return out;
}

size_t label_index(AttackLabel a) { return size_t(a); }

}  // namespace

void TokenFeatureSpec::validate() const {
  for (const std::string& t : tokens) {
    if (t.empty()) throw Error(ErrorCode::ConfigInvalid, "empty token");
    if (std::find(excluded.begin(), excluded.end(), t) != excluded.end())
      throw Error(ErrorCode::ConfigInvalid, "excluded token in feature list: '" + t + "'");
  }
  std::set<std::string> seen(tokens.begin(), tokens.end());
  if (seen.size() != tokens.size())
    throw Error(ErrorCode::ConfigInvalid, "duplicate token in feature list");
}

TokenFeatureSpec default_token_spec(AttackLabel attack) {
  TokenFeatureSpec spec;
  spec.attack = attack;
  spec.version = 1;
  switch (attack) {
    case AttackLabel::XSS:
      spec.excluded = {" !", "^",      "<>",     "[]",
                       "createelement", "search", "eval()", "string.fromcharcode"};
      spec.tokens = {"<script",  "</script", "javascript:",     "onerror",  "onload",
                     "onmouseover", "onclick", "alert(",          "prompt(",  "confirm(",
                     "document.cookie", "document.write", "<iframe", "<img", "<svg",
                     "src=",     "expression("};
      break;
    case AttackLabel::SQLI:
      spec.excluded = {"-",  "/**/", "'",  ";",  "#",  "[",  "]",  "(",  ")", "^",
                       "|",  "<>",   "<=", ">=", "&&", "||", ":",  " !=", "()"};
      spec.tokens = {"union",      "select",      "insert into", "update",   "delete from",
                     "drop table", "truncate",    " or ",        " and ",    "order by",
                     "group by",   "having",      "information_schema", "sleep(",
                     "benchmark(", "waitfor delay", "load_file",  "outfile",  "xp_",
                     "concat(",    "cast(",       "union all"};
      break;
    case AttackLabel::OSC:
      spec.excluded = {"..\\\\", "\\\\.", "\\\\/", ":/", "etc/passwd", "`"};
      spec.tokens = {"cat ",   "rm -rf",  "wget ",   "curl ",  "chmod",  "chown",
                     "/bin/sh", "/bin/bash", "nc -",  "ping -", ";",      "&&",
                     "$(",     "${",      ">/dev/null", "whoami", "uname", "sleep "};
      break;
  }
  spec.validate();
  return spec;
}

std::string url_decode_once(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '%' && i + 2 < raw.size()) {
      int hi = hex_val(raw[i + 1]);
      int lo = hex_val(raw[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(char(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(raw[i]);
  }
  return out;
}

HttpFeatureVector extract_http_features(const HttpRequest& req, const TokenFeatureSpec& spec) {
  std::string haystack = to_lower(url_decode_once(req.raw));
  HttpFeatureVector out;
  out.attack = spec.attack;
  out.counts.reserve(spec.tokens.size());
  for (const std::string& token : spec.tokens) {
    std::string needle = to_lower(token);
    int count = 0;
    size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
      ++count;
      pos += needle.size();  // non-overlapping
    }
    out.counts.push_back(count);
  }
  return out;
}

Dataset feature_vectors_to_dataset(std::span<const HttpFeatureVector> vectors,
                                   std::span<const int> labels) {
  Dataset ds;
  if (vectors.empty()) return ds;
  char name[8];
  for (size_t i = 0; i < vectors[0].counts.size(); ++i) {
    std::snprintf(name, sizeof(name), "f%02zu", i);
    ds.schema.push_back({name, FeatureType::NUMERIC});
  }
  for (size_t i = 0; i < vectors.size(); ++i) {
    std::vector<double> row(vectors[i].counts.begin(), vectors[i].counts.end());
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(labels[i]);
  }
  ds.validate();
  return ds;
}

void TokenFeatureSpec::save_json(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["version"] = version;
  j["attack"] = attack_label_name(attack);
  j["tokens"] = tokens;
  j["excluded"] = excluded;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

TokenFeatureSpec TokenFeatureSpec::load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  TokenFeatureSpec spec;
  spec.version = j.at("version").get<int>();
  auto label = parse_attack_label(j.at("attack").get<std::string>());
  if (!label) throw Error(ErrorCode::ConfigInvalid, "bad attack label in token spec");
  spec.attack = *label;
  spec.tokens = j.at("tokens").get<std::vector<std::string>>();
  spec.excluded = j.at("excluded").get<std::vector<std::string>>();
  spec.validate();
  return spec;
}

HttpIds::HttpIds() {
  for (auto a : {AttackLabel::SQLI, AttackLabel::XSS, AttackLabel::OSC})
    specs_[label_index(a)] = default_token_spec(a);
}

void HttpIds::set_model(AttackLabel attack, ClassifierModel model) {
  models_[label_index(attack)] = std::move(model);
}

void HttpIds::set_spec(AttackLabel attack, TokenFeatureSpec spec) {
  spec.validate();
  specs_[label_index(attack)] = std::move(spec);
}

const TokenFeatureSpec& HttpIds::spec(AttackLabel attack) const {
  return specs_[label_index(attack)];
}

const ClassifierModel& HttpIds::model(AttackLabel attack) const {
  return models_[label_index(attack)];
}

bool HttpIds::trained() const {
  return models_[0].trained && models_[1].trained && models_[2].trained;
}

std::set<AttackLabel> HttpIds::classify(const HttpRequest& req) const {
  std::set<AttackLabel> labels;
  for (auto a : {AttackLabel::SQLI, AttackLabel::XSS, AttackLabel::OSC}) {
    const ClassifierModel& m = models_[label_index(a)];
    if (!m.trained) throw Error(ErrorCode::UntrainedModel, attack_label_name(a));
    HttpFeatureVector v = extract_http_features(req, specs_[label_index(a)]);
    std::vector<double> row(v.counts.begin(), v.counts.end());
    if (m.predict(row) == 1) labels.insert(a);
  }
  return labels;
}

}  // namespace soar
