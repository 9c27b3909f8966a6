#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hed/errors.hpp"
#include "hed/stages.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::string corpus;
  std::string pool;
  std::string templates;
  std::string rules;
  std::string task;
  std::string mode;
  std::vector<std::string> static_examples;
  double min_ratio = -1.0;
  std::string backend;
  std::string replay_store;
  std::string out_dir;
  std::string model;
  std::string endpoint;
};

hed::RunConfig build_config(const RunFlags& f) {
  hed::RunConfig cfg;
  if (!f.config.empty()) cfg = hed::RunConfig::load(f.config);
  if (!f.corpus.empty()) cfg.corpus = f.corpus;
  if (!f.pool.empty()) cfg.example_pool = f.pool;
  if (!f.templates.empty()) cfg.template_dir = f.templates;
  if (!f.rules.empty()) cfg.rules = f.rules;
  if (!f.task.empty()) cfg.task = hed::parse_task(f.task);
  if (!f.mode.empty()) cfg.mode = hed::parse_mode(f.mode);
  if (!f.static_examples.empty()) cfg.static_examples = f.static_examples;
  if (f.min_ratio >= 0.0) cfg.min_ratio = f.min_ratio;
  if (!f.backend.empty()) cfg.backend = f.backend;
  if (!f.replay_store.empty()) cfg.replay_store = f.replay_store;
  if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
  if (!f.model.empty()) cfg.client.model = f.model;
  if (!f.endpoint.empty()) cfg.client.endpoint = f.endpoint;
  return cfg;
}

void add_run_flags(CLI::App* sub, RunFlags& f) {
  sub->add_option("--config", f.config, "JSON run configuration file");
  sub->add_option("--corpus", f.corpus, "evaluation corpus JSONL (overrides config)");
  sub->add_option("--pool", f.pool, "few-shot example pool JSONL (overrides config)");
  sub->add_option("--templates", f.templates, "prompt template directory");
  sub->add_option("--rules", f.rules, "preamble rule file");
  sub->add_option("--task", f.task, "e+cl or cl");
  sub->add_option("--mode", f.mode, "static, dynamic or zero");
  sub->add_option("--static-example", f.static_examples,
                  "static example record id (give 4 times)");
  sub->add_option("--min-ratio", f.min_ratio, "matcher overlap threshold in [0,1]");
  sub->add_option("--backend", f.backend, "live or replay");
  sub->add_option("--replay-store", f.replay_store, "replay store JSONL");
  sub->add_option("--out-dir", f.out_dir, "stage output directory");
  sub->add_option("--model", f.model, "model name sent to the endpoint");
  sub->add_option("--endpoint", f.endpoint, "chat-completion endpoint URL");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"URL mention annotation pipeline: prompt an LLM over README "
               "contexts, parse its output, and score it against gold labels"};
  app.require_subcommand(1);

  RunFlags flags;
  std::function<void()> action;

  struct {
    std::vector<std::string> repos;
    std::string repos_file;
    std::string input;
    std::string input_repo;
    std::string out;
    std::string base_url;
    std::string token_env;
    bool include_fences = false;
    bool exclude_html = false;
    std::size_t min_context = 80;
    int max_in_flight = 4;
    double timeout = 30.0;
    int retries = 2;
  } hv;

  auto* harvest = app.add_subcommand("harvest", "fetch READMEs and extract URL contexts");
  harvest->add_option("--repo", hv.repos, "repository as owner/name (repeatable)");
  harvest->add_option("--repos-file", hv.repos_file, "newline-separated repo list");
  harvest->add_option("--input", hv.input, "local README file instead of fetching");
  harvest->add_option("--input-repo", hv.input_repo, "repo slug the local file belongs to");
  harvest->add_option("--out", hv.out, "output corpus JSONL")->required();
  harvest->add_option("--base-url", hv.base_url, "raw-content base URL");
  harvest->add_option("--token-env", hv.token_env, "env var holding an auth token");
  harvest->add_flag("--include-fences", hv.include_fences, "harvest URLs inside code fences");
  harvest->add_flag("--exclude-html", hv.exclude_html, "skip href/src attributes");
  harvest->add_option("--min-context", hv.min_context, "minimum context characters");
  harvest->add_option("--max-in-flight", hv.max_in_flight, "concurrent fetches");
  harvest->add_option("--timeout", hv.timeout, "fetch timeout seconds");
  harvest->add_option("--retries", hv.retries, "fetch retry cap");
  harvest->callback([&] {
    action = [&] {
      hed::HarvestOptions opts;
      opts.repos = hv.repos;
      opts.repos_file = hv.repos_file;
      opts.input_markdown = hv.input;
      opts.input_repo = hv.input_repo;
      opts.out = hv.out;
      if (!hv.base_url.empty()) opts.fetch.base_url = hv.base_url;
      opts.fetch.token_env = hv.token_env;
      opts.fetch.timeout_seconds = hv.timeout;
      opts.fetch.max_retries = hv.retries;
      opts.extract.include_code_fences = hv.include_fences;
      opts.extract.include_html = !hv.exclude_html;
      opts.context.min_context_chars = hv.min_context;
      opts.max_in_flight = hv.max_in_flight;
      const std::size_t n = hed::stage_harvest(opts);
      std::cout << "harvested " << n << " records to " << hv.out << "\n";
    };
  });

  const struct {
    const char* name;
    const char* help;
    void (*fn)(const hed::RunConfig&);
  } stages[] = {
      {"prompt", "render prompts for every corpus record", hed::stage_prompt},
      {"run", "submit rendered prompts to the completion backend", hed::stage_run},
      {"parse", "convert raw outputs into structured predictions", hed::stage_parse},
      {"match", "align predictions with gold mentions", hed::stage_match},
      {"eval", "score matches and write the report", hed::stage_eval},
      {"pipeline", "prompt, run, parse, match and eval in sequence", hed::stage_pipeline},
  };
  for (const auto& stage : stages) {
    auto* sub = app.add_subcommand(stage.name, stage.help);
    add_run_flags(sub, flags);
    auto fn = stage.fn;
    sub->callback([&, fn] { action = [&, fn] { fn(build_config(flags)); }; });
  }

  std::vector<std::string> report_dirs;
  auto* report = app.add_subcommand("report", "combined table from finished run directories");
  report->add_option("dirs", report_dirs, "run output directories")->required();
  report->callback([&] {
    action = [&] {
      std::vector<std::filesystem::path> dirs(report_dirs.begin(), report_dirs.end());
      std::cout << hed::collect_reports(dirs);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    action();
  } catch (const hed::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
