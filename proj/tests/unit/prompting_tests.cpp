#include <doctest.h>

#include <string>
#include <vector>

#include "hed/corpus.hpp"
#include "hed/errors.hpp"
#include "hed/prompting.hpp"

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
    REQUIRE(at != std::string::npos);  // all-ASCII fixtures: byte == char offset
    m.url = url;
    m.start = at;
    m.end = at + url.size();
    m.label = label;
    rec.mentions.push_back(std::move(m));
  }
  return rec;
}

const std::string kGowallaContext =
    "Gowalla https://snap.stanford.edu/data/loc-gowalla.html : the pre-processed "
    "data that we used in the paper can be downloaded here "
    "http://dawenl.github.io/data/gowalla_pro.zip .";

ContextRecord gowalla_record(std::string id = "snap/gowalla#1") {
  return make_record(std::move(id), "snap/gowalla", kGowallaContext,
                     {{"https://snap.stanford.edu/data/loc-gowalla.html",
                       UrlClass::DatasetLandingPage},
                      {"http://dawenl.github.io/data/gowalla_pro.zip",
                       UrlClass::DatasetDirectLink}});
}

// Three filler examples so static prompts reach the required four.
std::vector<ContextRecord> filler_examples() {
  return {
      make_record("f/one#1", "f/one", "Get the tool at https://f.test/one today.",
                  {{"https://f.test/one", UrlClass::Software}}),
      make_record("f/two#1", "f/two", "Data lives at https://f.test/two.zip for all.",
                  {{"https://f.test/two.zip", UrlClass::DatasetDirectLink}}),
      make_record("f/three#1", "f/three", "See https://f.test/three for details now.",
                  {{"https://f.test/three", UrlClass::Other}}),
  };
}

PromptTemplates shipped_templates() {
  return PromptTemplates::load(HED_DATA_DIR "/templates");
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = haystack.find(needle); at != std::string::npos;
       at = haystack.find(needle, at + 1)) {
    ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("task and mode names round-trip") {
  CHECK(task_name(PromptTask::ExtractClassify) == "e+cl");
  CHECK(task_name(PromptTask::ClassifyOnly) == "cl");
  CHECK(parse_task("e+cl") == PromptTask::ExtractClassify);
  CHECK(parse_task("cl") == PromptTask::ClassifyOnly);
  CHECK_THROWS_AS(parse_task("ner"), ConfigError);

  CHECK(mode_name(ExampleMode::Dynamic) == "dynamic");
  CHECK(parse_mode("static") == ExampleMode::Static);
  CHECK(parse_mode("zero") == ExampleMode::ZeroShot);
  CHECK_THROWS_AS(parse_mode("fewshot"), ConfigError);
}

TEST_CASE("similarity of identical token multisets is exactly 1") {
  CHECK(similarity("alpha beta gamma", "alpha beta gamma") == 1.0);
  // tokenization ignores case and punctuation
  CHECK(similarity("Data, SET!", "data set") == 1.0);
}

TEST_CASE("similarity hand-computed value") {
  // tf(a)= {a:2, b:1}, tf(b) = {a:1, b:2}; dot = 2*1 + 1*2 = 4,
  // |a| = |b| = sqrt(5), so cos = 4/5.
  CHECK(similarity("a a b", "a b b") == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("similarity edge cases") {
  CHECK(similarity("alpha beta", "gamma delta") == 0.0);
  CHECK(similarity("", "alpha") == 0.0);
  CHECK(similarity("...", "alpha") == 0.0);
  CHECK(similarity("alpha beta", "beta alpha") == 1.0);  // order-insensitive
}

TEST_CASE("dynamic selection ranks by similarity with id tie-break") {
  Corpus pool;
  pool.records = {
      make_record("p/far#1", "p/far", "zeta eta theta http://z.test/x here",
                  {{"http://z.test/x", UrlClass::Other}}),
      make_record("p/near#1", "p/near", "alpha beta gamma http://n.test/x here",
                  {{"http://n.test/x", UrlClass::Other}}),
      make_record("p/mid#1", "p/mid", "alpha beta zeta http://m.test/x here",
                  {{"http://m.test/x", UrlClass::Other}}),
  };
  const auto target = make_record("t/t#1", "t/t", "alpha beta gamma http://t.test/x here",
                                  {{"http://t.test/x", UrlClass::Other}});

  const auto top2 = select_dynamic_examples(target, pool, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2[0]->id == "p/near#1");
  CHECK(top2[1]->id == "p/mid#1");

  // equal scores fall back to ascending id
  Corpus tied;
  tied.records = {
      make_record("p/b#1", "p/b", "alpha beta http://b.test/x here",
                  {{"http://b.test/x", UrlClass::Other}}),
      make_record("p/a#1", "p/a", "alpha beta http://a.test/x here",
                  {{"http://a.test/x", UrlClass::Other}}),
  };
  const auto tie = select_dynamic_examples(target, tied, 2);
  CHECK(tie[0]->id == "p/a#1");
  CHECK(tie[1]->id == "p/b#1");
}

TEST_CASE("dynamic selection never offers the target or its repo") {
  Corpus pool;
  pool.records = {
      make_record("t/t#1", "t/t", "alpha http://t.test/x", {{"http://t.test/x", UrlClass::Other}}),
      make_record("t/t#2", "t/t", "alpha http://t.test/y", {{"http://t.test/y", UrlClass::Other}}),
      make_record("o/o#1", "o/o", "alpha http://o.test/x", {{"http://o.test/x", UrlClass::Other}}),
  };
  const auto& target = pool.records[0];

  const auto picked = select_dynamic_examples(target, pool, 1);
  REQUIRE(picked.size() == 1);
  CHECK(picked[0]->id == "o/o#1");

  // only one eligible candidate exists, so asking for two must fail loudly
  CHECK_THROWS_WITH_AS(select_dynamic_examples(target, pool, 2),
                       doctest::Contains("example pool too small"), ConfigError);
}

TEST_CASE("static selection preserves configured order and validates ids") {
  Corpus pool;
  pool.records = filler_examples();
  const std::vector<std::string> ids = {"f/three#1", "f/one#1"};
  const auto picked = select_static_examples(pool, ids);
  REQUIRE(picked.size() == 2);
  CHECK(picked[0]->id == "f/three#1");
  CHECK(picked[1]->id == "f/one#1");

  const std::vector<std::string> unknown = {"f/none#1"};
  CHECK_THROWS_WITH_AS(select_static_examples(pool, unknown),
                       doctest::Contains("not found"), ConfigError);
  const std::vector<std::string> dup = {"f/one#1", "f/one#1"};
  CHECK_THROWS_WITH_AS(select_static_examples(pool, dup),
                       doctest::Contains("listed twice"), ConfigError);
}

TEST_CASE("templates load with a stable version hash") {
  const auto a = shipped_templates();
  const auto b = shipped_templates();
  CHECK(a.version == b.version);
  CHECK(a.version.size() == 16);
  CHECK(a.version.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(a.extract_classify.find("{{{ EXAMPLES }}}") != std::string::npos);
  CHECK(a.classify_only.find("{{{INSERT URL HERE}}}") != std::string::npos);
}

TEST_CASE("example output serialization matches the documented spacing") {
  const auto rec = gowalla_record();
  CHECK(example_output_json(rec) ==
        R"([{"URL": "https://snap.stanford.edu/data/loc-gowalla.html", "label": "dataset_landing_page"},)"
        R"({"URL": "http://dawenl.github.io/data/gowalla_pro.zip", "label": "dataset_direct_link"}])");
}

TEST_CASE("extraction prompt embeds examples and target verbatim") {
  const auto templates = shipped_templates();
  auto pool = filler_examples();
  const auto gowalla = gowalla_record();
  const auto target = make_record("u/user#1", "u/user",
                                  "Try our models at http://u.test/models now.",
                                  {{"http://u.test/models", UrlClass::Software}});
  const std::vector<const ContextRecord*> examples = {&gowalla, &pool[0], &pool[1],
                                                      &pool[2]};

  const auto prompt = render_prompt(templates, PromptTask::ExtractClassify, examples,
                                    target);

  CHECK(prompt.text.rfind("<s>[INST]<<sys>>You act as a human annotator.", 0) == 0);
  CHECK(prompt.text.find("# Example 1:\nInput: " + kGowallaContext + "\nOutput: ") !=
        std::string::npos);
  CHECK(prompt.text.find(
            R"(Output: [{"URL": "https://snap.stanford.edu/data/loc-gowalla.html", "label": "dataset_landing_page"},{"URL": "http://dawenl.github.io/data/gowalla_pro.zip", "label": "dataset_direct_link"}])") !=
        std::string::npos);
  CHECK(prompt.text.find("# Example 4:") != std::string::npos);
  CHECK(prompt.text.find("# to annotate\nInput: Try our models at http://u.test/models "
                         "now.[/INST]") != std::string::npos);
  CHECK(prompt.text.find("{{{") == std::string::npos);
  CHECK(prompt.example_ids ==
        std::vector<std::string>{"snap/gowalla#1", "f/one#1", "f/two#1", "f/three#1"});
  CHECK(prompt.target_id == "u/user#1");
  CHECK_FALSE(prompt.target_url.has_value());
}

TEST_CASE("prompts take exactly four examples or none") {
  const auto templates = shipped_templates();
  auto pool = filler_examples();
  const auto target = gowalla_record("t/other#1");
  const std::vector<const ContextRecord*> two = {&pool[0], &pool[1]};
  CHECK_THROWS_AS(
      render_prompt(templates, PromptTask::ExtractClassify, two, target), ConfigError);

  const std::vector<const ContextRecord*> none;
  const auto zero = render_prompt(templates, PromptTask::ExtractClassify, none, target);
  CHECK(zero.text.find("# Example") == std::string::npos);
  CHECK(zero.text.find("{{{") == std::string::npos);
  CHECK(zero.example_ids.empty());
}

TEST_CASE("a record never serves as its own example") {
  const auto templates = shipped_templates();
  auto pool = filler_examples();
  const auto target = gowalla_record();
  const auto twin = gowalla_record();  // same id as target
  const std::vector<const ContextRecord*> examples = {&twin, &pool[0], &pool[1],
                                                      &pool[2]};
  CHECK_THROWS_WITH_AS(
      render_prompt(templates, PromptTask::ExtractClassify, examples, target),
      doctest::Contains("among its own examples"), ConfigError);
}

TEST_CASE("classification prompt carries the URL line") {
  const auto templates = shipped_templates();
  auto pool = filler_examples();
  const auto gowalla = gowalla_record();
  const auto target = make_record("u/user#1", "u/user",
                                  "Weights http://u.test/w.bin and code http://u.test/src here.",
                                  {{"http://u.test/w.bin", UrlClass::DatasetDirectLink},
                                   {"http://u.test/src", UrlClass::Software}});
  const std::vector<const ContextRecord*> examples = {&gowalla, &pool[0], &pool[1],
                                                      &pool[2]};

  const auto prompt = render_prompt(templates, PromptTask::ClassifyOnly, examples,
                                    target, std::string("http://u.test/src"));
  CHECK(prompt.text.find("URL: http://u.test/src[/INST]") != std::string::npos);
  CHECK(prompt.target_url == "http://u.test/src");
  // each example classifies its first mention: one URL object per example
  CHECK(count_occurrences(prompt.text, "{\"URL\": ") == 4);
  CHECK(count_occurrences(prompt.text, "URL: ") == 4 + 1 + 1);  // examples + format + target

  CHECK_THROWS_AS(render_prompt(templates, PromptTask::ClassifyOnly, examples, target),
                  ConfigError);
  CHECK_THROWS_WITH_AS(
      render_prompt(templates, PromptTask::ClassifyOnly, examples, target,
                    std::string("http://elsewhere.test/")),
      doctest::Contains("does not occur"), ConfigError);
}
