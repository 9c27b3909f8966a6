#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hed/corpus.hpp"

namespace hed {

// One model-asserted (URL, label) pair. label is the normalized class when
// raw_label is recognized, nullopt (Unknown) otherwise. Unknown predictions
// are kept and scored as incorrect rather than dropped.
struct Prediction {
  std::string url;
  std::optional<std::string> raw_label;
  std::optional<UrlClass> label;
};

enum class ParseFailReason {
  NoJsonFound,         // no structural JSON content at all
  UnrecoverableSyntax, // structural characters present, no complete object recoverable
  EmptyAfterRepair,    // repair succeeded but zero usable predictions remain
};

std::string_view to_string(ParseFailReason r);

// Parsed(list) | Failed(reason). The list is empty only when the model
// asserted a literal empty array.
struct ParseOutcome {
  bool parsed = false;
  std::vector<Prediction> predictions;
  ParseFailReason reason = ParseFailReason::NoJsonFound;

  static ParseOutcome ok(std::vector<Prediction> preds);
  static ParseOutcome fail(ParseFailReason r);

  std::string status() const;  // "parsed" or the failure reason name
};

// Ordered, data-driven replacement rules that remove conversational openers
// and closers before JSON repair. Rules come from a JSON file so new model
// quirks need no code change.
class PreambleRules {
 public:
  static PreambleRules load(const std::filesystem::path& path);
  static PreambleRules from_json(const nlohmann::json& j);

  std::string apply(const std::string& raw) const;
  std::size_t size() const { return rules_.size(); }

 private:
  struct Rule {
    std::string name;
    std::regex pattern;
    std::string replacement;
  };
  std::vector<Rule> rules_;
};

std::string strip_preamble(const std::string& raw, const PreambleRules& rules);

// Repairs a model output string into one canonical JSON array string.
// Repairs are ordered least to most invasive and applied until the first
// success, so already-valid arrays pass through unchanged.
struct ConsolidateOutcome {
  std::optional<std::string> array_json;
  ParseFailReason fail = ParseFailReason::NoJsonFound;
};
ConsolidateOutcome consolidate_json(const std::string& s);

// Full pipeline: strip_preamble -> consolidate_json -> field extraction.
// Never throws; every input maps to Parsed or Failed.
ParseOutcome parse_predictions(const std::string& raw, const PreambleRules& rules);

// Fraction of outcomes that parsed. Throws on an empty list.
double parse_ratio(std::span<const ParseOutcome> outcomes);

// Canonical serialization of predictions as a JSON array in the same shape
// prompts teach the model: [{"URL": "...", "label": "dataset_direct_link"}]
// with the lowercase label spelling, raw spelling for unknown labels, and no
// label key when none was asserted. Parsing this string reproduces the
// predictions.
std::string predictions_to_array_json(std::span<const Prediction> preds);

}  // namespace hed
