#include <doctest.h>

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hed/corpus.hpp"
#include "hed/errors.hpp"
#include "hed/jsonl.hpp"
#include "hed/stages.hpp"
#include "support/temp_dir.hpp"

using namespace hed;

namespace {

ContextRecord make_record(std::string id, std::string repo, std::string context,
                          std::vector<std::pair<std::string, UrlClass>> urls) {
  ContextRecord rec;
  rec.id = std::move(id);
  rec.repo = std::move(repo);
  rec.context = std::move(context);
  for (auto& [url, label] : urls) {
    Mention m;
    const auto at = rec.context.find(url);
    REQUIRE(at != std::string::npos);
    m.url = url;
    m.start = at;
    m.end = at + url.size();
    m.label = label;
    rec.mentions.push_back(std::move(m));
  }
  return rec;
}

void write_corpus(const std::filesystem::path& path,
                  std::vector<ContextRecord> records) {
  Corpus corpus;
  corpus.records = std::move(records);
  save_corpus(corpus, path);
}

void write_target_corpus(const std::filesystem::path& path) {
  write_corpus(path,
               {make_record("t/alpha#1", "t/alpha",
                            "Alpha corpus at http://t.test/alpha.zip for download.",
                            {{"http://t.test/alpha.zip", UrlClass::DatasetDirectLink}}),
                make_record("t/beta#1", "t/beta",
                            "Beta page https://t.test/beta and tool "
                            "https://t.test/beta-tool here.",
                            {{"https://t.test/beta", UrlClass::DatasetLandingPage},
                             {"https://t.test/beta-tool", UrlClass::Software}}),
                make_record("t/gamma#1", "t/gamma",
                            "Gamma site https://t.test/gamma for all.",
                            {{"https://t.test/gamma", UrlClass::Other}})});
}

void write_pool_corpus(const std::filesystem::path& path) {
  std::vector<ContextRecord> records;
  for (int i = 1; i <= 5; ++i) {
    const std::string n = std::to_string(i);
    records.push_back(make_record(
        "p/ex" + n + "#1", "p/ex" + n,
        "Example " + n + " data at http://p" + n + ".test/data now.",
        {{"http://p" + n + ".test/data", UrlClass::DatasetLandingPage}}));
  }
  write_corpus(path, std::move(records));
}

RunConfig base_config(const test_support::TempDir& tmp) {
  RunConfig cfg;
  cfg.corpus = tmp / "corpus.jsonl";
  cfg.example_pool = tmp / "pool.jsonl";
  cfg.template_dir = HED_DATA_DIR "/templates";
  cfg.rules = HED_DATA_DIR "/rules/preamble_rules.json";
  cfg.task = PromptTask::ExtractClassify;
  cfg.mode = ExampleMode::Static;
  cfg.static_examples = {"p/ex1#1", "p/ex2#1", "p/ex3#1", "p/ex4#1"};
  cfg.backend = "replay";
  cfg.replay_store = tmp / "replay.jsonl";
  cfg.output_dir = tmp / "out";
  cfg.client.model = "m-test";
  write_target_corpus(cfg.corpus);
  write_pool_corpus(cfg.example_pool);
  return cfg;
}

// fingerprint of each rendered prompt, keyed by "<id>" or "<id>#m<mention>"
std::map<std::string, std::string> prompt_fingerprints(const RunConfig& cfg) {
  std::map<std::string, std::string> fps;
  jsonl::for_each(StagePaths{cfg.output_dir}.prompts(),
                  [&](std::size_t, const nlohmann::json& j) {
                    std::string key = j.at("id").get<std::string>();
                    if (j.contains("mention")) {
                      key += "#m" + std::to_string(j.at("mention").get<std::size_t>());
                    }
                    fps[key] = j.at("fingerprint").get<std::string>();
                  });
  return fps;
}

void write_replay(const std::filesystem::path& path,
                  const std::map<std::string, std::string>& by_fingerprint) {
  std::vector<nlohmann::ordered_json> rows;
  for (const auto& [fp, raw] : by_fingerprint) {
    rows.push_back(nlohmann::ordered_json{{"fingerprint", fp}, {"raw", raw}});
  }
  jsonl::write_lines_atomic(path, rows);
}

std::string slurp(const std::filesystem::path& path) {
  return jsonl::read_text_file(path);
}

}  // namespace

TEST_CASE("run config validation catches contradictory setups") {
  test_support::TempDir tmp;
  RunConfig cfg = base_config(tmp);
  CHECK_NOTHROW(cfg.validate());

  RunConfig bad = cfg;
  bad.example_pool = bad.corpus;  // the same file by another name
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("example_pool"), ConfigError);

  bad = cfg;
  bad.static_examples = {"p/ex1#1"};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("exactly 4"), ConfigError);

  bad = cfg;
  bad.backend = "imaginary";
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = cfg;
  bad.replay_store.clear();
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("replay_store"), ConfigError);

  bad = cfg;
  bad.min_ratio = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = cfg;
  bad.example_pool.clear();
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("never defaulted"), ConfigError);
}

TEST_CASE("config files load with paths relative to their directory") {
  test_support::TempDir tmp;
  write_target_corpus(tmp / "corpus.jsonl");
  write_pool_corpus(tmp / "pool.jsonl");
  const nlohmann::ordered_json j{
      {"corpus", "corpus.jsonl"},
      {"example_pool", "pool.jsonl"},
      {"template_dir", HED_DATA_DIR "/templates"},
      {"rules", HED_DATA_DIR "/rules/preamble_rules.json"},
      {"task", "e+cl"},
      {"mode", "static"},
      {"static_examples", {"p/ex1#1", "p/ex2#1", "p/ex3#1", "p/ex4#1"}},
      {"backend", "replay"},
      {"replay_store", "replay.jsonl"},
      {"output_dir", "out"},
  };
  jsonl::write_file_atomic(tmp / "config.json", j.dump(2) + "\n");

  const RunConfig cfg = RunConfig::load(tmp / "config.json");
  CHECK(cfg.corpus == tmp / "corpus.jsonl");
  CHECK(cfg.example_pool == tmp / "pool.jsonl");
  CHECK(cfg.replay_store == tmp / "replay.jsonl");
  CHECK(cfg.output_dir == tmp / "out");
  CHECK(cfg.task == PromptTask::ExtractClassify);
  CHECK(cfg.mode == ExampleMode::Static);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("extraction pipeline end to end on a replay store") {
  test_support::TempDir tmp;
  RunConfig cfg = base_config(tmp);

  stage_prompt(cfg);
  const auto fps = prompt_fingerprints(cfg);
  REQUIRE(fps.size() == 3);  // one extraction prompt per record

  write_replay(cfg.replay_store,
               {{fps.at("t/alpha#1"),
                 R"([{"URL": "http://t.test/alpha.zip", "label": "dataset_direct_link"}])"},
                {fps.at("t/beta#1"),
                 "Sure! Here is the annotation:\n"
                 R"([{"URL": "https://t.test/beta", "label": "software"},)"
                 R"({"URL": "https://t.test/beta-tool", "label": "software"}])"},
                {fps.at("t/gamma#1"), "I cannot annotate this."}});

  stage_run(cfg);
  stage_parse(cfg);
  stage_match(cfg);
  stage_eval(cfg);

  const StagePaths paths{cfg.output_dir};

  // outputs: replay hits, in corpus order
  const auto outputs = jsonl::read_all(paths.outputs());
  REQUIRE(outputs.size() == 3);
  CHECK(outputs[0].at("id") == "t/alpha#1");
  CHECK(outputs[0].at("backend") == "replay");
  CHECK(outputs[0].at("ok") == true);

  // predictions: beta's preamble is stripped, gamma fails to parse
  const auto predictions = jsonl::read_all(paths.predictions());
  REQUIRE(predictions.size() == 3);
  CHECK(predictions[0].at("parse_status") == "parsed");
  CHECK(predictions[1].at("parse_status") == "parsed");
  CHECK(predictions[1].at("predictions").size() == 2);
  CHECK(predictions[2].at("parse_status") == "no_json_found");
  CHECK(predictions[2].at("predictions").empty());

  // matches: alpha and beta pair up, gamma's gold goes missing
  const auto matches = jsonl::read_all(paths.matches());
  REQUIRE(matches.size() == 3);
  CHECK(matches[0].at("pairs").size() == 1);
  CHECK(matches[0].at("pairs")[0].at("ratio") == 1.0);
  CHECK(matches[1].at("pairs").size() == 2);
  CHECK(matches[2].at("pairs").empty());
  CHECK(matches[2].at("missing").size() == 1);

  // scores: strict correct = alpha + beta-tool; beta page has a wrong label;
  // counts c=2 i=1 m=1 s=0 give P=2/3, R=2/4; parse_ratio = 2/3
  const std::string csv = slurp(paths.report_csv());
  CHECK(csv.find("m-test,e+cl,static,strict,0.6667,0.5000,0.6667,0.5000,0.6667\n") !=
        std::string::npos);

  const auto manifest = nlohmann::json::parse(slurp(paths.manifest()));
  CHECK(manifest.at("config").at("backend") == "replay");
  CHECK(manifest.at("templates").contains("version"));
  CHECK(manifest.at("stages").at("prompt").contains("fingerprint"));
  CHECK(manifest.at("stages").at("parse").at("parse_ratio").get<double>() ==
        doctest::Approx(2.0 / 3.0));
  CHECK(manifest.at("stages").at("run").at("failed") == 0);
  CHECK(manifest.at("stages").at("eval").at("records") == 3);

  // the collected table shows the run keyed by model and task
  const auto table = collect_reports({cfg.output_dir});
  CHECK(table.find("== Task: e+cl ==") != std::string::npos);
  CHECK(table.find("m-test") != std::string::npos);
}

TEST_CASE("re-running the pipeline rewrites canonical outputs byte-identically") {
  test_support::TempDir tmp;
  RunConfig cfg = base_config(tmp);

  stage_prompt(cfg);
  const auto fps = prompt_fingerprints(cfg);
  write_replay(cfg.replay_store,
               {{fps.at("t/alpha#1"),
                 R"([{"URL": "http://t.test/alpha.zip", "label": "dataset_direct_link"}])"},
                {fps.at("t/beta#1"), "[]"},
                {fps.at("t/gamma#1"),
                 R"([{"URL": "https://t.test/gamma", "label": "other"}])"}});
  stage_pipeline(cfg);

  const StagePaths paths{cfg.output_dir};
  const std::vector<std::filesystem::path> canonical = {
      paths.prompts(), paths.outputs(),    paths.predictions(),
      paths.matches(), paths.report_csv(), paths.report_txt(),
      paths.manifest()};
  std::map<std::string, std::string> first;
  for (const auto& p : canonical) first[p.string()] = slurp(p);
  const auto raw_log_lines_once = jsonl::read_all(paths.raw_log()).size();

  stage_pipeline(cfg);
  for (const auto& p : canonical) {
    CAPTURE(p.string());
    CHECK(slurp(p) == first[p.string()]);
  }
  // the raw log is the append-only exception: a second config header plus
  // one line per prompt
  CHECK(jsonl::read_all(paths.raw_log()).size() == 2 * raw_log_lines_once);
}

TEST_CASE("classification prompts fan out per mention and group per record") {
  test_support::TempDir tmp;
  RunConfig cfg = base_config(tmp);
  cfg.task = PromptTask::ClassifyOnly;

  stage_prompt(cfg);
  const auto fps = prompt_fingerprints(cfg);
  REQUIRE(fps.size() == 4);  // alpha 1 + beta 2 + gamma 1
  REQUIRE(fps.count("t/beta#1#m0") == 1);
  REQUIRE(fps.count("t/beta#1#m1") == 1);

  write_replay(cfg.replay_store,
               {{fps.at("t/alpha#1#m0"),
                 R"([{"URL": "http://t.test/alpha.zip", "label": "dataset_direct_link"}])"},
                {fps.at("t/beta#1#m0"),
                 R"([{"URL": "https://t.test/beta", "label": "dataset_landing_page"}])"},
                {fps.at("t/beta#1#m1"), "sorry, no idea"},
                {fps.at("t/gamma#1#m0"),
                 R"([{"URL": "https://t.test/gamma", "label": "other"}])"}});
  stage_run(cfg);
  stage_parse(cfg);

  const StagePaths paths{cfg.output_dir};
  const auto predictions = jsonl::read_all(paths.predictions());
  REQUIRE(predictions.size() == 3);  // grouped back to records
  CHECK(predictions[0].at("id") == "t/alpha#1");
  CHECK(predictions[0].at("parse_status") == "parsed");
  // one failed mention taints the record, but parsed mentions are kept
  CHECK(predictions[1].at("id") == "t/beta#1");
  CHECK(predictions[1].at("parse_status") == "no_json_found");
  CHECK(predictions[1].at("predictions").size() == 1);

  const auto manifest = nlohmann::json::parse(slurp(paths.manifest()));
  CHECK(manifest.at("stages").at("parse").at("parse_ratio").get<double>() ==
        doctest::Approx(3.0 / 4.0));
}

TEST_CASE("replay misses become failed outputs, not aborts") {
  test_support::TempDir tmp;
  RunConfig cfg = base_config(tmp);

  stage_prompt(cfg);
  const auto fps = prompt_fingerprints(cfg);
  write_replay(cfg.replay_store,
               {{fps.at("t/alpha#1"),
                 R"([{"URL": "http://t.test/alpha.zip", "label": "dataset_direct_link"}])"}});
  stage_run(cfg);
  stage_parse(cfg);

  const StagePaths paths{cfg.output_dir};
  const auto outputs = jsonl::read_all(paths.outputs());
  REQUIRE(outputs.size() == 3);
  CHECK(outputs[0].at("ok") == true);
  CHECK(outputs[1].at("ok") == false);
  CHECK(outputs[1].at("error").get<std::string>().find("t/beta#1") != std::string::npos);

  const auto predictions = jsonl::read_all(paths.predictions());
  CHECK(predictions[1].at("parse_status") == "no_output");

  const auto manifest = nlohmann::json::parse(slurp(paths.manifest()));
  CHECK(manifest.at("stages").at("run").at("failed") == 2);
}

TEST_CASE("zero-shot runs need no example pool") {
  test_support::TempDir tmp;
  RunConfig cfg = base_config(tmp);
  cfg.mode = ExampleMode::ZeroShot;
  cfg.static_examples.clear();
  cfg.example_pool.clear();

  stage_prompt(cfg);
  const auto prompts = jsonl::read_all(StagePaths{cfg.output_dir}.prompts());
  REQUIRE(prompts.size() == 3);
  CHECK(prompts[0].at("example_ids").empty());
  CHECK(prompts[0].at("text").get<std::string>().find("# Example") ==
        std::string::npos);
}

TEST_CASE("harvest stage writes an unannotated corpus from a local readme") {
  test_support::TempDir tmp;
  const auto readme = tmp / "README.md";
  jsonl::write_file_atomic(readme,
                           "# Tool\n\nGet data at http://h.test/data.zip today.\n"
                           "Docs: [site](https://h.test/docs) page.\n");

  HarvestOptions opts;
  opts.input_markdown = readme;
  opts.input_repo = "acme/tool";
  opts.out = tmp / "harvested.jsonl";
  const auto count = stage_harvest(opts);
  CHECK(count == 2);

  const Corpus corpus = load_corpus(opts.out, {.allow_unlabeled = true});
  REQUIRE(corpus.records.size() == 2);
  CHECK(corpus.records[0].id == "acme/tool#1");
  CHECK(corpus.records[0].mentions[0].url == "http://h.test/data.zip");
  CHECK_FALSE(corpus.records[0].mentions[0].label.has_value());

  // local input without an attributed repo is a configuration error
  HarvestOptions missing = opts;
  missing.input_repo.clear();
  CHECK_THROWS_AS(stage_harvest(missing), ConfigError);
}
