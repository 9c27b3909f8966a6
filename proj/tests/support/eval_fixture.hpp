#pragma once

#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "hed/corpus.hpp"
#include "hed/errors.hpp"
#include "hed/evaluator.hpp"
#include "hed/matcher.hpp"

namespace test_support {

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hed::ConfigError("cannot open " + path);
  return nlohmann::json::parse(in);
}

struct EvalFixture {
  std::vector<hed::ScoredRecord> records;
  double parse_ratio = 1.0;
};

// Builds ScoredRecords from the hand-computed fixture JSON: golds/preds are
// (url, label) pairs and the match comes from the production matcher. Spans
// are irrelevant to scoring and left at zero.
inline EvalFixture load_eval_fixture(const std::string& path) {
  const auto j = load_json_file(path);
  EvalFixture fx;
  fx.parse_ratio = j.at("parse_ratio").get<double>();
  for (const auto& rec : j.at("records")) {
    hed::ScoredRecord sr;
    std::vector<std::string> gold_urls, pred_urls;
    for (const auto& g : rec.at("golds")) {
      hed::Mention m;
      m.url = g.at("url").get<std::string>();
      m.label = hed::normalize_label(g.at("label").get<std::string>());
      if (!m.label) throw hed::SchemaError("fixture gold label unknown");
      sr.golds.push_back(m);
      gold_urls.push_back(m.url);
    }
    for (const auto& p : rec.at("preds")) {
      hed::Prediction pred;
      pred.url = p.at("url").get<std::string>();
      pred.raw_label = p.at("label").get<std::string>();
      pred.label = hed::normalize_label(*pred.raw_label);
      sr.preds.push_back(pred);
      pred_urls.push_back(pred.url);
    }
    sr.match = hed::match_record(pred_urls, gold_urls);
    fx.records.push_back(std::move(sr));
  }
  return fx;
}

// Random runs for property checks: a handful of records with 0-4 golds and
// 0-4 predictions each, URLs assembled from a small fragment pool so
// overlaps, exact matches, and disjoint strings all occur. Prediction labels
// are sometimes unknown spellings.
inline std::vector<hed::ScoredRecord> random_scored_records(std::mt19937& rng) {
  static const std::vector<std::string> kFragments = {
      "http://a.test/data", "http://a.test/data.zip",   "https://b.test/tool",
      "https://b.test/",    "http://c.test/paper.html", "http://a.test/",
  };
  std::uniform_int_distribution<int> record_count(1, 5);
  std::uniform_int_distribution<int> side_count(0, 4);
  std::uniform_int_distribution<std::size_t> fragment(0, kFragments.size() - 1);
  std::uniform_int_distribution<int> label4(0, 3);
  std::uniform_int_distribution<int> unknown_roll(0, 9);

  std::vector<hed::ScoredRecord> records;
  const int n = record_count(rng);
  for (int r = 0; r < n; ++r) {
    hed::ScoredRecord sr;
    std::vector<std::string> gold_urls, pred_urls;
    const int golds = side_count(rng);
    const int preds = side_count(rng);
    for (int g = 0; g < golds; ++g) {
      hed::Mention m;
      m.url = kFragments[fragment(rng)];
      m.label = hed::kAllClasses[label4(rng)];
      sr.golds.push_back(m);
      gold_urls.push_back(m.url);
    }
    for (int p = 0; p < preds; ++p) {
      hed::Prediction pred;
      pred.url = kFragments[fragment(rng)];
      if (unknown_roll(rng) == 0) {
        pred.raw_label = "weblink";  // unknown spelling
      } else {
        pred.raw_label = std::string(hed::prompt_label(hed::kAllClasses[label4(rng)]));
      }
      pred.label = hed::normalize_label(*pred.raw_label);
      sr.preds.push_back(pred);
      pred_urls.push_back(pred.url);
    }
    sr.match = hed::match_record(pred_urls, gold_urls);
    records.push_back(std::move(sr));
  }
  return records;
}

}  // namespace test_support
