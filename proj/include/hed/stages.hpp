#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hed/harvest.hpp"
#include "hed/llm_client.hpp"
#include "hed/matcher.hpp"
#include "hed/prompting.hpp"

namespace hed {

// One experiment configuration: which corpus to annotate, how to build
// prompts, which backend answers them, and where stage outputs land.
struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path example_pool;  // never defaulted to the corpus
  std::filesystem::path template_dir;
  std::filesystem::path rules;  // preamble rule file
  PromptTask task = PromptTask::ExtractClassify;
  ExampleMode mode = ExampleMode::Static;
  std::vector<std::string> static_examples;
  double min_ratio = 0.0;  // matcher threshold
  ClientConfig client;
  std::string backend = "replay";  // "live" | "replay"
  std::filesystem::path replay_store;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  // Reads a JSON config file; relative paths resolve against its directory.
  static RunConfig load(const std::filesystem::path& config_path);
  static RunConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base_dir);

  nlohmann::ordered_json to_json() const;
  void validate() const;  // throws ConfigError
};

// Stage file layout inside output_dir.
struct StagePaths {
  std::filesystem::path dir;

  std::filesystem::path prompts() const { return dir / "prompts.jsonl"; }
  std::filesystem::path raw_log() const { return dir / "raw_log.jsonl"; }
  std::filesystem::path outputs() const { return dir / "outputs.jsonl"; }
  std::filesystem::path predictions() const { return dir / "predictions.jsonl"; }
  std::filesystem::path matches() const { return dir / "matches.jsonl"; }
  std::filesystem::path report_csv() const { return dir / "report.csv"; }
  std::filesystem::path report_txt() const { return dir / "report.txt"; }
  std::filesystem::path manifest() const { return dir / "manifest.json"; }
};

// Each stage reads its predecessor's JSONL, writes its own atomically, and
// records itself in the manifest. Re-running a stage on unchanged inputs
// rewrites byte-identical canonical outputs (the append-only raw log is the
// one exception).
void stage_prompt(const RunConfig& cfg);
void stage_run(const RunConfig& cfg);
void stage_parse(const RunConfig& cfg);
void stage_match(const RunConfig& cfg);
void stage_eval(const RunConfig& cfg);

// prompt -> run -> parse -> match -> eval
void stage_pipeline(const RunConfig& cfg);

// Renders the aligned-text report for one or more run directories by
// reading their report.csv files.
std::string collect_reports(const std::vector<std::filesystem::path>& run_dirs);

struct HarvestOptions {
  std::vector<std::string> repos;        // owner/name or host/owner/name tokens
  std::filesystem::path repos_file;      // newline-separated list, # comments
  std::filesystem::path input_markdown;  // local README instead of fetching
  std::string input_repo;                // repo slug attributed to input_markdown
  std::filesystem::path out;             // corpus JSONL (labels empty)
  FetchConfig fetch;
  ExtractConfig extract;
  ContextConfig context;
  int max_in_flight = 4;
};

// Fetches READMEs (or reads the local file), extracts URL contexts, and
// writes an unannotated corpus. Returns the number of records written.
std::size_t stage_harvest(const HarvestOptions& opts);

}  // namespace hed
