#include "hed/stages.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <sstream>

#include "hed/errors.hpp"
#include "hed/evaluator.hpp"
#include "hed/jsonl.hpp"
#include "hed/output_parser.hpp"

namespace hed {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

std::filesystem::path json_path(const nlohmann::json& j, const char* key,
                                const std::filesystem::path& base) {
  if (!j.contains(key)) return {};
  return resolve(base, std::filesystem::path(j.at(key).get<std::string>()));
}

// The manifest is rebuilt with a fixed key order on every update so
// re-running stages keeps it byte-stable.
nlohmann::ordered_json load_manifest(const StagePaths& paths) {
  if (!std::filesystem::exists(paths.manifest())) return nlohmann::ordered_json::object();
  nlohmann::ordered_json j =
      nlohmann::ordered_json::parse(jsonl::read_text_file(paths.manifest()), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return nlohmann::ordered_json::object();
  return j;
}

void write_manifest(const StagePaths& paths, nlohmann::ordered_json manifest) {
  nlohmann::ordered_json ordered = nlohmann::ordered_json::object();
  for (const char* key : {"config", "templates"}) {
    if (manifest.contains(key)) ordered[key] = manifest[key];
  }
  if (manifest.contains("stages")) {
    nlohmann::ordered_json stages = nlohmann::ordered_json::object();
    for (const char* key : {"prompt", "run", "parse", "match", "eval"}) {
      if (manifest["stages"].contains(key)) stages[key] = manifest["stages"][key];
    }
    ordered["stages"] = std::move(stages);
  }
  jsonl::write_file_atomic(paths.manifest(), ordered.dump(2) + "\n");
}

void record_stage(const RunConfig& cfg, const char* stage, nlohmann::ordered_json info,
                  nlohmann::ordered_json extra_top = {}) {
  const StagePaths paths{cfg.output_dir};
  nlohmann::ordered_json manifest = load_manifest(paths);
  manifest["config"] = cfg.to_json();
  if (extra_top.is_object()) {
    for (auto& [k, v] : extra_top.items()) manifest[k] = v;
  }
  if (!manifest.contains("stages")) manifest["stages"] = nlohmann::ordered_json::object();
  manifest["stages"][stage] = std::move(info);
  write_manifest(paths, std::move(manifest));
}

struct OutputRow {
  std::string id;
  std::optional<std::size_t> mention;  // CL only
  std::optional<std::string> url;      // CL only
  std::string fingerprint;
  bool ok = true;
  std::string raw;
  std::string error;
};

std::vector<OutputRow> read_outputs(const std::filesystem::path& path) {
  std::vector<OutputRow> rows;
  jsonl::for_each(path, [&](std::size_t line, const nlohmann::json& j) {
    OutputRow row;
    if (!j.contains("id")) {
      throw SchemaError(path.string() + ":" + std::to_string(line) + ": output row lacks id");
    }
    row.id = j.at("id").get<std::string>();
    if (j.contains("mention")) row.mention = j.at("mention").get<std::size_t>();
    if (j.contains("url")) row.url = j.at("url").get<std::string>();
    row.fingerprint = j.value("fingerprint", "");
    row.ok = j.value("ok", true);
    if (row.ok) {
      row.raw = j.value("raw", "");
    } else {
      row.error = j.value("error", "");
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

struct PredictionRow {
  std::string id;
  std::vector<Prediction> predictions;
  std::string parse_status;
};

std::vector<PredictionRow> read_predictions(const std::filesystem::path& path) {
  std::vector<PredictionRow> rows;
  jsonl::for_each(path, [&](std::size_t line, const nlohmann::json& j) {
    PredictionRow row;
    if (!j.contains("id") || !j.contains("predictions")) {
      throw SchemaError(path.string() + ":" + std::to_string(line) +
                        ": prediction row needs id and predictions");
    }
    row.id = j.at("id").get<std::string>();
    for (const auto& pj : j.at("predictions")) {
      Prediction p;
      p.url = pj.at("url").get<std::string>();
      if (pj.contains("label") && pj.at("label").is_string()) {
        const auto raw = pj.at("label").get<std::string>();
        if (!raw.empty()) {
          p.raw_label = raw;
          p.label = normalize_label(raw);
        }
      }
      row.predictions.push_back(std::move(p));
    }
    row.parse_status = j.value("parse_status", "parsed");
    rows.push_back(std::move(row));
  });
  return rows;
}

nlohmann::ordered_json prediction_row_to_json(const PredictionRow& row) {
  nlohmann::ordered_json j;
  j["id"] = row.id;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& p : row.predictions) {
    nlohmann::ordered_json pj;
    pj["url"] = p.url;
    if (p.label) {
      pj["label"] = std::string(canonical_name(*p.label));
    } else if (p.raw_label) {
      pj["label"] = *p.raw_label;
    }
    arr.push_back(std::move(pj));
  }
  j["predictions"] = std::move(arr);
  j["parse_status"] = row.parse_status;
  return j;
}

struct MatchRow {
  std::string id;
  MatchResult result;
};

std::vector<MatchRow> read_matches(const std::filesystem::path& path) {
  std::vector<MatchRow> rows;
  jsonl::for_each(path, [&](std::size_t, const nlohmann::json& j) {
    MatchRow row;
    row.id = j.at("id").get<std::string>();
    for (const auto& pj : j.at("pairs")) {
      row.result.pairs.push_back({pj.at("gold").get<std::size_t>(),
                                  pj.at("pred").get<std::size_t>(),
                                  pj.at("ratio").get<double>()});
    }
    for (const auto& g : j.at("missing")) row.result.missing.push_back(g.get<std::size_t>());
    for (const auto& p : j.at("spurious")) row.result.spurious.push_back(p.get<std::size_t>());
    rows.push_back(std::move(row));
  });
  return rows;
}

std::string combined_fingerprint(const std::vector<RenderedPrompt>& prompts) {
  std::string all;
  for (const auto& p : prompts) all += prompt_fingerprint(p.text);
  return prompt_fingerprint(all);
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& config_path) {
  nlohmann::json j = nlohmann::json::parse(jsonl::read_text_file(config_path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ConfigError(config_path.string() + " is not a JSON object");
  }
  return from_json(j, config_path.parent_path());
}

RunConfig RunConfig::from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.corpus = json_path(j, "corpus", base_dir);
  cfg.example_pool = json_path(j, "example_pool", base_dir);
  cfg.template_dir = json_path(j, "template_dir", base_dir);
  cfg.rules = json_path(j, "rules", base_dir);
  if (j.contains("task")) cfg.task = parse_task(j.at("task").get<std::string>());
  if (j.contains("mode")) cfg.mode = parse_mode(j.at("mode").get<std::string>());
  if (j.contains("static_examples")) {
    cfg.static_examples = j.at("static_examples").get<std::vector<std::string>>();
  }
  if (j.contains("min_ratio")) cfg.min_ratio = j.at("min_ratio").get<double>();
  if (j.contains("client")) cfg.client = ClientConfig::from_json(j.at("client"));
  if (j.contains("backend")) cfg.backend = j.at("backend").get<std::string>();
  cfg.replay_store = json_path(j, "replay_store", base_dir);
  if (j.contains("output_dir")) cfg.output_dir = json_path(j, "output_dir", base_dir);
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["corpus"] = corpus.string();
  j["example_pool"] = example_pool.string();
  j["template_dir"] = template_dir.string();
  j["rules"] = rules.string();
  j["task"] = std::string(task_name(task));
  j["mode"] = std::string(mode_name(mode));
  j["static_examples"] = static_examples;
  j["min_ratio"] = min_ratio;
  j["client"] = client.to_json();
  j["backend"] = backend;
  j["replay_store"] = replay_store.string();
  j["output_dir"] = output_dir.string();
  j["seed"] = seed;
  return j;
}

void RunConfig::validate() const {
  if (corpus.empty()) throw ConfigError("config needs a corpus path");
  if (template_dir.empty()) throw ConfigError("config needs a template_dir");
  if (rules.empty()) throw ConfigError("config needs a preamble rules path");
  if (output_dir.empty()) throw ConfigError("config needs an output_dir");
  if (mode != ExampleMode::ZeroShot) {
    if (example_pool.empty()) {
      throw ConfigError("few-shot modes need an explicit example_pool; "
                        "it is never defaulted to the corpus");
    }
    if (std::filesystem::exists(corpus) && std::filesystem::exists(example_pool) &&
        std::filesystem::equivalent(corpus, example_pool)) {
      throw ConfigError("example_pool must not be the evaluation corpus itself");
    }
  }
  if (mode == ExampleMode::Static && static_examples.size() != 4) {
    throw ConfigError("static mode needs exactly 4 static_examples, got " +
                      std::to_string(static_examples.size()));
  }
  if (backend != "live" && backend != "replay") {
    throw ConfigError("backend must be live or replay, got '" + backend + "'");
  }
  if (backend == "replay" && replay_store.empty()) {
    throw ConfigError("replay backend needs a replay_store path");
  }
  if (min_ratio < 0.0 || min_ratio > 1.0) {
    throw ConfigError("min_ratio must be in [0,1]");
  }
  client.validate();
}

void stage_prompt(const RunConfig& cfg) {
  cfg.validate();
  const StagePaths paths{cfg.output_dir};
  std::filesystem::create_directories(cfg.output_dir);

  const Corpus corpus = load_corpus(cfg.corpus, {.allow_unlabeled = true});
  Corpus pool;
  if (cfg.mode != ExampleMode::ZeroShot) pool = load_corpus(cfg.example_pool);
  const PromptTemplates templates = PromptTemplates::load(cfg.template_dir);

  std::vector<RenderedPrompt> prompts;
  std::vector<nlohmann::ordered_json> rows;
  for (const auto& rec : corpus.records) {
    const auto examples =
        select_examples(rec, pool, 4, cfg.mode, cfg.static_examples);
    if (cfg.task == PromptTask::ExtractClassify) {
      RenderedPrompt p = render_prompt(templates, cfg.task, examples, rec, std::nullopt);
      nlohmann::ordered_json row;
      row["id"] = rec.id;
      row["fingerprint"] = prompt_fingerprint(p.text);
      row["example_ids"] = p.example_ids;
      row["text"] = p.text;
      rows.push_back(std::move(row));
      prompts.push_back(std::move(p));
    } else {
      for (std::size_t m = 0; m < rec.mentions.size(); ++m) {
        RenderedPrompt p =
            render_prompt(templates, cfg.task, examples, rec, rec.mentions[m].url);
        nlohmann::ordered_json row;
        row["id"] = rec.id;
        row["mention"] = m;
        row["url"] = rec.mentions[m].url;
        row["fingerprint"] = prompt_fingerprint(p.text);
        row["example_ids"] = p.example_ids;
        row["text"] = p.text;
        rows.push_back(std::move(row));
        prompts.push_back(std::move(p));
      }
    }
  }

  jsonl::write_lines_atomic(paths.prompts(), rows);
  record_stage(cfg, "prompt",
               nlohmann::ordered_json{{"prompts", prompts.size()},
                                      {"records", corpus.records.size()},
                                      {"fingerprint", combined_fingerprint(prompts)}},
               nlohmann::ordered_json{
                   {"templates", nlohmann::ordered_json{{"version", templates.version}}}});
}

void stage_run(const RunConfig& cfg) {
  cfg.validate();
  const StagePaths paths{cfg.output_dir};

  std::vector<RenderedPrompt> prompts;
  std::vector<nlohmann::ordered_json> meta;  // id/mention/url per prompt
  jsonl::for_each(paths.prompts(), [&](std::size_t, const nlohmann::json& j) {
    RenderedPrompt p;
    p.target_id = j.at("id").get<std::string>();
    p.text = j.at("text").get<std::string>();
    if (j.contains("url")) p.target_url = j.at("url").get<std::string>();
    nlohmann::ordered_json m;
    m["id"] = p.target_id;
    if (j.contains("mention")) m["mention"] = j.at("mention").get<std::size_t>();
    if (j.contains("url")) m["url"] = j.at("url").get<std::string>();
    prompts.push_back(std::move(p));
    meta.push_back(std::move(m));
  });

  std::unique_ptr<CompletionBackend> backend;
  if (cfg.backend == "replay") {
    backend = std::make_unique<ReplayBackend>(cfg.replay_store);
  } else {
    backend = std::make_unique<HttpChatBackend>(cfg.client);
  }

  const auto outputs = run_batch(*backend, prompts, cfg.client, paths.raw_log());

  std::vector<nlohmann::ordered_json> rows;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    nlohmann::ordered_json row = meta[i];
    row["fingerprint"] = outputs[i].fingerprint;
    row["backend"] = std::string(backend_name(outputs[i].backend));
    row["ok"] = outputs[i].ok;
    if (outputs[i].ok) {
      row["raw"] = outputs[i].raw;
    } else {
      row["error"] = outputs[i].error;
      ++failed;
    }
    rows.push_back(std::move(row));
  }
  jsonl::write_lines_atomic(paths.outputs(), rows);
  record_stage(cfg, "run",
               nlohmann::ordered_json{{"outputs", outputs.size()},
                                      {"failed", failed},
                                      {"backend", cfg.backend}});
}

void stage_parse(const RunConfig& cfg) {
  cfg.validate();
  const StagePaths paths{cfg.output_dir};
  const PreambleRules rules = PreambleRules::load(cfg.rules);
  const auto outputs = read_outputs(paths.outputs());
  if (outputs.empty()) throw SchemaError(paths.outputs().string() + " is empty");

  std::vector<PredictionRow> rows;
  std::map<std::string, std::size_t> row_index;
  std::size_t parsed_outputs = 0;

  for (const auto& out : outputs) {
    auto [it, inserted] = row_index.emplace(out.id, rows.size());
    if (inserted) rows.push_back({out.id, {}, "parsed"});
    PredictionRow& row = rows[it->second];

    std::string status;
    if (!out.ok) {
      status = "no_output";
    } else {
      const ParseOutcome outcome = parse_predictions(out.raw, rules);
      status = outcome.status();
      if (outcome.parsed) {
        ++parsed_outputs;
        row.predictions.insert(row.predictions.end(), outcome.predictions.begin(),
                               outcome.predictions.end());
      }
    }
    // a record is "parsed" only when every one of its outputs parsed
    if (status != "parsed" && row.parse_status == "parsed") row.parse_status = status;
  }

  std::vector<nlohmann::ordered_json> out_rows;
  out_rows.reserve(rows.size());
  for (const auto& row : rows) out_rows.push_back(prediction_row_to_json(row));
  jsonl::write_lines_atomic(paths.predictions(), out_rows);

  const double ratio = static_cast<double>(parsed_outputs) / static_cast<double>(outputs.size());
  record_stage(cfg, "parse",
               nlohmann::ordered_json{{"outputs", outputs.size()},
                                      {"parsed", parsed_outputs},
                                      {"parse_ratio", ratio}});
}

void stage_match(const RunConfig& cfg) {
  cfg.validate();
  const StagePaths paths{cfg.output_dir};
  const Corpus corpus = load_corpus(cfg.corpus);
  const auto predictions = read_predictions(paths.predictions());
  std::map<std::string, const PredictionRow*> by_id;
  for (const auto& row : predictions) by_id[row.id] = &row;

  const MatchConfig match_cfg{cfg.min_ratio};
  std::vector<nlohmann::ordered_json> rows;
  std::size_t pairs = 0, missing = 0, spurious = 0;
  for (const auto& rec : corpus.records) {
    std::vector<std::string> pred_urls;
    if (auto it = by_id.find(rec.id); it != by_id.end()) {
      for (const auto& p : it->second->predictions) pred_urls.push_back(p.url);
    }
    std::vector<std::string> gold_urls;
    for (const auto& m : rec.mentions) gold_urls.push_back(m.url);

    const MatchResult result = match_record(pred_urls, gold_urls, match_cfg);
    nlohmann::ordered_json row;
    row["id"] = rec.id;
    auto pair_arr = nlohmann::ordered_json::array();
    for (const auto& p : result.pairs) {
      pair_arr.push_back(nlohmann::ordered_json{
          {"gold", p.gold_index}, {"pred", p.pred_index}, {"ratio", p.ratio}});
    }
    row["pairs"] = std::move(pair_arr);
    row["missing"] = result.missing;
    row["spurious"] = result.spurious;
    rows.push_back(std::move(row));
    pairs += result.pairs.size();
    missing += result.missing.size();
    spurious += result.spurious.size();
  }
  jsonl::write_lines_atomic(paths.matches(), rows);
  record_stage(cfg, "match",
               nlohmann::ordered_json{{"records", corpus.records.size()},
                                      {"pairs", pairs},
                                      {"missing", missing},
                                      {"spurious", spurious}});
}

void stage_eval(const RunConfig& cfg) {
  cfg.validate();
  const StagePaths paths{cfg.output_dir};
  const Corpus corpus = load_corpus(cfg.corpus);
  const auto predictions = read_predictions(paths.predictions());
  const auto matches = read_matches(paths.matches());

  std::map<std::string, const PredictionRow*> preds_by_id;
  for (const auto& row : predictions) preds_by_id[row.id] = &row;
  std::map<std::string, const MatchRow*> matches_by_id;
  for (const auto& row : matches) matches_by_id[row.id] = &row;

  std::vector<ScoredRecord> scored;
  for (const auto& rec : corpus.records) {
    ScoredRecord sr;
    sr.golds = rec.mentions;
    if (auto it = preds_by_id.find(rec.id); it != preds_by_id.end()) {
      sr.preds = it->second->predictions;
    }
    if (auto it = matches_by_id.find(rec.id); it != matches_by_id.end()) {
      sr.match = it->second->result;
    } else {
      for (std::size_t g = 0; g < sr.golds.size(); ++g) sr.match.missing.push_back(g);
      for (std::size_t p = 0; p < sr.preds.size(); ++p) sr.match.spurious.push_back(p);
    }
    scored.push_back(std::move(sr));
  }

  // prefer the parse stage's per-output statistics; fall back to counting
  // prediction rows when eval runs on hand-built fixtures
  double ratio;
  const nlohmann::ordered_json manifest = load_manifest(paths);
  if (manifest.contains("stages") && manifest["stages"].contains("parse") &&
      manifest["stages"]["parse"].contains("parse_ratio")) {
    ratio = manifest["stages"]["parse"]["parse_ratio"].get<double>();
  } else {
    if (predictions.empty()) throw SchemaError(paths.predictions().string() + " is empty");
    std::size_t parsed = 0;
    for (const auto& row : predictions) parsed += row.parse_status == "parsed" ? 1 : 0;
    ratio = static_cast<double>(parsed) / static_cast<double>(predictions.size());
  }

  RunReport report;
  report.model = cfg.client.model;
  report.task = std::string(task_name(cfg.task));
  report.mode = std::string(mode_name(cfg.mode));
  report.eval = score_run(scored, ratio);

  const RunReport reports[] = {report};
  jsonl::write_file_atomic(paths.report_csv(), render_report_csv(reports));
  jsonl::write_file_atomic(paths.report_txt(), render_report_table(reports));
  record_stage(cfg, "eval",
               nlohmann::ordered_json{{"records", scored.size()}, {"parse_ratio", ratio}});
}

void stage_pipeline(const RunConfig& cfg) {
  stage_prompt(cfg);
  stage_run(cfg);
  stage_parse(cfg);
  stage_match(cfg);
  stage_eval(cfg);
}

std::string collect_reports(const std::vector<std::filesystem::path>& run_dirs) {
  std::vector<RunReport> reports;
  for (const auto& dir : run_dirs) {
    const StagePaths paths{dir};
    const std::string csv = jsonl::read_text_file(paths.report_csv());
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    // model,task,mode,scheme,precision,recall,precision_binary,recall_binary,parse_ratio
    std::map<std::string, RunReport> grouped;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (cells.size() != 9) throw SchemaError(paths.report_csv().string() + ": bad row: " + line);
      const std::string key = cells[0] + "\x1f" + cells[1] + "\x1f" + cells[2];
      RunReport& r = grouped[key];
      r.model = cells[0];
      r.task = cells[1];
      r.mode = cells[2];
      r.eval.parse_ratio = std::stod(cells[8]);
      for (std::size_t i = 0; i < 4; ++i) {
        if (scheme_name(static_cast<Scheme>(i)) != cells[3]) continue;
        auto& mc = r.eval.multiclass[i];
        auto& bin = r.eval.binary[i];
        mc.precision = std::stod(cells[4]);
        mc.recall = std::stod(cells[5]);
        bin.precision = std::stod(cells[6]);
        bin.recall = std::stod(cells[7]);
        // counts are unavailable from CSV; flags default to defined
      }
    }
    for (auto& [_, rep] : grouped) reports.push_back(rep);
  }
  return render_report_table(reports);
}

std::size_t stage_harvest(const HarvestOptions& opts) {
  if (opts.out.empty()) throw ConfigError("harvest needs an output path");
  Corpus corpus;

  if (!opts.input_markdown.empty()) {
    if (opts.input_repo.empty()) {
      throw ConfigError("harvesting a local file needs the repo it belongs to");
    }
    const RepoRef repo = RepoRef::parse(opts.input_repo);
    const std::string markdown = jsonl::read_text_file(opts.input_markdown);
    auto records = harvest_records(markdown, repo, opts.extract, opts.context);
    corpus.records.insert(corpus.records.end(), std::make_move_iterator(records.begin()),
                          std::make_move_iterator(records.end()));
  }

  std::vector<RepoRef> repos;
  for (const auto& token : opts.repos) repos.push_back(RepoRef::parse(token));
  if (!opts.repos_file.empty()) {
    const std::string listing = jsonl::read_text_file(opts.repos_file);
    std::istringstream in(listing);
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      std::size_t start = line.find_first_not_of(" \t");
      if (start == std::string::npos) continue;
      if (line[start] == '#') continue;
      repos.push_back(RepoRef::parse(line.substr(start)));
    }
  }
  if (repos.empty() && opts.input_markdown.empty()) {
    throw ConfigError("harvest needs repos, a repos file, or a local markdown file");
  }

  if (!repos.empty()) {
    const auto results = fetch_many(repos, opts.fetch, opts.max_in_flight);
    for (const auto& r : results) {
      if (!r.ok) {
        throw TransportError("failed to fetch " + r.repo.canonical() + ": " + r.error);
      }
      auto records = harvest_records(r.markdown, r.repo, opts.extract, opts.context);
      corpus.records.insert(corpus.records.end(), std::make_move_iterator(records.begin()),
                            std::make_move_iterator(records.end()));
    }
  }

  save_corpus(corpus, opts.out);
  return corpus.records.size();
}

}  // namespace hed
