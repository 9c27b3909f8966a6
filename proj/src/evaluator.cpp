#include "hed/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "hed/errors.hpp"

namespace hed {
namespace {

bool labels_match(const Prediction& pred, const Mention& gold, LabelMode mode) {
  if (!gold.label) throw SchemaError("gold mention without label in scoring");
  if (mode == LabelMode::Binary) {
    const bool pred_dataset = pred.label ? binary_label(*pred.label) : false;
    return pred_dataset == binary_label(*gold.label);
  }
  return pred.label && *pred.label == *gold.label;
}

double safe_div(double num, double den, bool& defined) {
  if (den == 0.0) {
    defined = false;
    return 0.0;
  }
  defined = true;
  return num / den;
}

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string cell(const SchemeScores& s, bool precision) {
  const double v = precision ? s.precision : s.recall;
  const bool defined = precision ? s.precision_defined : s.recall_defined;
  return fmt(v, "%.3f") + (defined ? " " : "*");
}

}  // namespace

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Strict: return "strict";
    case Scheme::Exact: return "exact";
    case Scheme::Partial: return "partial";
    case Scheme::Type: return "type";
  }
  return "strict";
}

void score_pair(const Prediction& pred, const Mention& gold, double ratio,
                Scheme scheme, LabelMode mode, EvalCounts& counts) {
  (void)ratio;  // a pair's existence already witnesses the overlap
  const bool url_eq = pred.url == gold.url;
  const bool label_eq = labels_match(pred, gold, mode);
  switch (scheme) {
    case Scheme::Strict:
      (url_eq && label_eq ? counts.correct : counts.incorrect) += 1;
      break;
    case Scheme::Exact:
      (url_eq ? counts.correct : counts.incorrect) += 1;
      break;
    case Scheme::Partial:
      (url_eq ? counts.correct : counts.partial) += 1;
      break;
    case Scheme::Type:
      (label_eq ? counts.correct : counts.incorrect) += 1;
      break;
  }
}

SchemeScores score_scheme(std::span<const ScoredRecord> records, Scheme scheme,
                          LabelMode mode) {
  SchemeScores s;
  for (const auto& rec : records) {
    for (const auto& pair : rec.match.pairs) {
      if (pair.pred_index >= rec.preds.size() || pair.gold_index >= rec.golds.size()) {
        throw SchemaError("match pair index out of range");
      }
      score_pair(rec.preds[pair.pred_index], rec.golds[pair.gold_index],
                 pair.ratio, scheme, mode, s.counts);
    }
    s.counts.missing += rec.match.missing.size();
    s.counts.spurious += rec.match.spurious.size();
  }
  const double hit = static_cast<double>(s.counts.correct) +
                     0.5 * static_cast<double>(s.counts.partial);
  const double attempted = static_cast<double>(s.counts.correct + s.counts.incorrect +
                                               s.counts.partial + s.counts.spurious);
  const double expected = static_cast<double>(s.counts.correct + s.counts.incorrect +
                                              s.counts.partial + s.counts.missing);
  s.precision = safe_div(hit, attempted, s.precision_defined);
  s.recall = safe_div(hit, expected, s.recall_defined);
  return s;
}

EvalReport score_run(std::span<const ScoredRecord> records, double parse_ratio_value) {
  if (records.empty()) throw SchemaError("score_run: empty run");
  EvalReport report;
  report.parse_ratio = parse_ratio_value;
  report.record_count = records.size();
  for (Scheme scheme : kAllSchemes) {
    const auto i = static_cast<std::size_t>(scheme);
    report.multiclass[i] = score_scheme(records, scheme, LabelMode::Multiclass);
    report.binary[i] = score_scheme(records, scheme, LabelMode::Binary);
  }
  return report;
}

std::string render_report_csv(std::span<const RunReport> reports) {
  std::ostringstream out;
  out << "model,task,mode,scheme,precision,recall,precision_binary,recall_binary,"
         "parse_ratio\n";
  for (const auto& run : reports) {
    for (Scheme scheme : kAllSchemes) {
      const auto& mc = run.eval.scores(scheme, LabelMode::Multiclass);
      const auto& b = run.eval.scores(scheme, LabelMode::Binary);
      out << run.model << ',' << run.task << ',' << run.mode << ','
          << scheme_name(scheme) << ',' << fmt(mc.precision, "%.4f") << ','
          << fmt(mc.recall, "%.4f") << ',' << fmt(b.precision, "%.4f") << ','
          << fmt(b.recall, "%.4f") << ',' << fmt(run.eval.parse_ratio, "%.4f")
          << '\n';
    }
  }
  return out.str();
}

std::string render_report_table(std::span<const RunReport> reports) {
  // Group runs by task, then model; static and dynamic fill fixed column
  // groups, zero-shot gets a group only when present.
  std::set<std::string> tasks;
  for (const auto& r : reports) tasks.insert(r.task);

  std::size_t model_width = std::string("Model").size();
  for (const auto& r : reports) model_width = std::max(model_width, r.model.size());

  std::ostringstream out;
  for (const auto& task : tasks) {
    std::vector<const RunReport*> in_task;
    bool any_zero = false;
    for (const auto& r : reports) {
      if (r.task == task) {
        in_task.push_back(&r);
        if (r.mode == "zero") any_zero = true;
      }
    }
    std::vector<std::string> modes = {"static", "dynamic"};
    if (any_zero) modes.push_back("zero");

    std::vector<std::string> models;
    for (const auto* r : in_task) {
      if (std::find(models.begin(), models.end(), r->model) == models.end()) {
        models.push_back(r->model);
      }
    }

    out << "== Task: " << task << " ==\n";
    const std::string empty_group(4 * 7, ' ');
    out << std::string(model_width, ' ') << "  " << std::string(8, ' ');
    for (const auto& mode : modes) {
      std::string title = mode == "static"    ? "Static Few-shot"
                          : mode == "dynamic" ? "Dynamic Few-shot"
                                              : "Zero-shot";
      title.resize(empty_group.size(), ' ');
      out << " | " << title;
    }
    out << '\n';
    out << std::string(model_width, ' ') << "  " << "Scheme  ";
    for (std::size_t m = 0; m < modes.size(); ++m) {
      out << " | " << "P      R      P(b)   R(b)  ";
    }
    out << '\n';

    for (const auto& model : models) {
      std::map<std::string, const RunReport*> by_mode;
      for (const auto* r : in_task) {
        if (r->model == model) by_mode[r->mode] = r;
      }
      bool first_row = true;
      for (Scheme scheme : kAllSchemes) {
        std::string name(first_row ? model : "");
        name.resize(model_width, ' ');
        std::string sname(scheme_name(scheme));
        sname.resize(8, ' ');
        out << name << "  " << sname;
        for (const auto& mode : modes) {
          auto it = by_mode.find(mode);
          if (it == by_mode.end()) {
            out << " | " << empty_group;
            continue;
          }
          const auto& mc = it->second->eval.scores(scheme, LabelMode::Multiclass);
          const auto& b = it->second->eval.scores(scheme, LabelMode::Binary);
          out << " | " << cell(mc, true) << "  " << cell(mc, false) << "  "
              << cell(b, true) << "  " << cell(b, false) << " ";
        }
        out << '\n';
        first_row = false;
      }
    }
    out << '\n';
  }

  out << "Parse statistics (parsed = schema-valid prediction array after repair)\n";
  out << "task      model                 mode      parsed%\n";
  for (const auto& r : reports) {
    std::string task = r.task;
    task.resize(8, ' ');
    std::string model = r.model;
    model.resize(std::max<std::size_t>(model_width, 20), ' ');
    std::string mode = r.mode;
    mode.resize(8, ' ');
    out << task << "  " << model << "  " << mode << "  "
        << fmt(100.0 * r.eval.parse_ratio, "%.1f") << '\n';
  }
  bool any_flag = false;
  for (const auto& r : reports) {
    for (Scheme s : kAllSchemes) {
      for (LabelMode m : {LabelMode::Multiclass, LabelMode::Binary}) {
        const auto& sc = r.eval.scores(s, m);
        any_flag = any_flag || !sc.precision_defined || !sc.recall_defined;
      }
    }
  }
  if (any_flag) out << "* metric undefined (0/0), reported as 0\n";
  return out.str();
}

}  // namespace hed
