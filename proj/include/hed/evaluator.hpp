#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hed/corpus.hpp"
#include "hed/matcher.hpp"
#include "hed/output_parser.hpp"

namespace hed {

// MUC-derived matching criteria, each computed for every run.
enum class Scheme { Strict, Exact, Partial, Type };

inline constexpr Scheme kAllSchemes[] = {Scheme::Strict, Scheme::Exact,
                                         Scheme::Partial, Scheme::Type};

std::string_view scheme_name(Scheme s);

enum class LabelMode { Multiclass, Binary };

struct EvalCounts {
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t partial = 0;
  std::size_t missing = 0;
  std::size_t spurious = 0;
};

// Per-pair verdict under one scheme/mode:
//   Strict  - correct iff URL and label both match
//   Exact   - correct iff URL matches, label ignored
//   Partial - correct iff URL matches, otherwise partial credit
//   Type    - correct iff label matches, any URL overlap suffices
// Binary mode collapses labels to dataset-related / not before comparison;
// an Unknown predicted label counts as non-dataset.
void score_pair(const Prediction& pred, const Mention& gold, double ratio,
                Scheme scheme, LabelMode mode, EvalCounts& counts);

// One record's inputs to scoring: gold mentions, predictions, and the
// 1-to-1 match between them. Parse failures are represented upstream as
// zero predictions with every gold in match.missing.
struct ScoredRecord {
  std::vector<Mention> golds;
  std::vector<Prediction> preds;
  MatchResult match;
};

struct SchemeScores {
  EvalCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  // 0/0 is defined as 0 and flagged here.
  bool precision_defined = true;
  bool recall_defined = true;
};

// Micro-aggregates counts across records, then applies
//   P = (correct + 0.5*partial) / (correct + incorrect + partial + spurious)
//   R = (correct + 0.5*partial) / (correct + incorrect + partial + missing)
SchemeScores score_scheme(std::span<const ScoredRecord> records, Scheme scheme,
                          LabelMode mode);

struct EvalReport {
  std::array<SchemeScores, 4> multiclass;  // indexed by Scheme order
  std::array<SchemeScores, 4> binary;
  double parse_ratio = 1.0;
  std::size_t record_count = 0;

  const SchemeScores& scores(Scheme s, LabelMode m) const {
    const auto i = static_cast<std::size_t>(s);
    return m == LabelMode::Multiclass ? multiclass[i] : binary[i];
  }
};

// Throws on an empty run.
EvalReport score_run(std::span<const ScoredRecord> records, double parse_ratio_value);

// One evaluated run, keyed the way report tables group rows and columns.
struct RunReport {
  std::string model;
  std::string task;  // "e+cl" | "cl"
  std::string mode;  // "static" | "dynamic" | "zero"
  EvalReport eval;
};

// CSV rows: model,task,mode,scheme,precision,recall,precision_binary,
// recall_binary,parse_ratio
std::string render_report_csv(std::span<const RunReport> reports);

// Aligned-text tables: per task, rows = model x scheme, column groups
// P/R/P(b)/R(b) for static and dynamic few-shot (cells left empty for
// absent runs), plus a parse-ratio section.
std::string render_report_table(std::span<const RunReport> reports);

}  // namespace hed
