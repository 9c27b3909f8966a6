#include <doctest.h>

#include <fstream>

#include "hed/corpus.hpp"
#include "hed/errors.hpp"
#include "hed/jsonl.hpp"
#include "support/temp_dir.hpp"

using namespace hed;
using test_support::TempDir;

namespace {

ContextRecord make_record() {
  ContextRecord rec;
  rec.id = "acme/data#1";
  rec.repo = "acme/data";
  rec.context = "Download from http://x.test/d.zip today.";
  rec.mentions.push_back({"http://x.test/d.zip", 14, 33, UrlClass::DatasetDirectLink});
  return rec;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p);
  for (const auto& l : lines) out << l << "\n";
}

}  // namespace

TEST_CASE("label normalization accepts case and separator variants") {
  CHECK(normalize_label("DatasetDirectLink") == UrlClass::DatasetDirectLink);
  CHECK(normalize_label("dataset_direct_link") == UrlClass::DatasetDirectLink);
  CHECK(normalize_label("DATASET-DIRECT-LINK") == UrlClass::DatasetDirectLink);
  CHECK(normalize_label("Dataset Landing Page") == UrlClass::DatasetLandingPage);
  CHECK(normalize_label("dataset_landing_page") == UrlClass::DatasetLandingPage);
  CHECK(normalize_label("SOFTWARE") == UrlClass::Software);
  CHECK(normalize_label("software") == UrlClass::Software);
  CHECK(normalize_label("other") == UrlClass::Other);
  CHECK(normalize_label("Other") == UrlClass::Other);
  CHECK_FALSE(normalize_label("dataset").has_value());
  CHECK_FALSE(normalize_label("").has_value());
  CHECK_FALSE(normalize_label("Software Repository").has_value());
}

TEST_CASE("binary collapse keeps only the dataset classes") {
  CHECK(binary_label(UrlClass::DatasetDirectLink));
  CHECK(binary_label(UrlClass::DatasetLandingPage));
  CHECK_FALSE(binary_label(UrlClass::Software));
  CHECK_FALSE(binary_label(UrlClass::Other));
}

TEST_CASE("canonical and prompt spellings round-trip through normalize_label") {
  for (UrlClass c : kAllClasses) {
    CHECK(normalize_label(canonical_name(c)) == c);
    CHECK(normalize_label(prompt_label(c)) == c);
  }
}

TEST_CASE("validate_record accepts a well-formed record") {
  CHECK_NOTHROW(validate_record(make_record()));
}

TEST_CASE("validate_record rejects span and ordering violations") {
  auto rec = make_record();
  rec.mentions[0].end = 32;  // substring no longer equals the url
  CHECK_THROWS_AS(validate_record(rec), SchemaError);

  rec = make_record();
  rec.mentions[0].end = 99;
  CHECK_THROWS_AS(validate_record(rec), SchemaError);

  rec = make_record();
  rec.mentions[0].start = rec.mentions[0].end;
  CHECK_THROWS_AS(validate_record(rec), SchemaError);

  rec = make_record();
  rec.mentions.clear();
  CHECK_THROWS_AS(validate_record(rec), SchemaError);

  // overlapping second mention
  rec = make_record();
  rec.mentions.push_back({"x.test/d.zip", 21, 33, UrlClass::Other});
  CHECK_THROWS_AS(validate_record(rec), SchemaError);
}

TEST_CASE("unlabeled mentions pass only when explicitly allowed") {
  auto rec = make_record();
  rec.mentions[0].label.reset();
  CHECK_THROWS_AS(validate_record(rec), SchemaError);
  CHECK_NOTHROW(validate_record(rec, /*allow_unlabeled=*/true));
}

TEST_CASE("spans are measured in characters, not bytes") {
  ContextRecord rec;
  rec.id = "acme/unicode#1";
  rec.repo = "acme/unicode";
  // two-byte mu and a four-byte emoji in front of the url
  rec.context = "\xc2\xb5-benchmark \xf0\x9f\x93\xa6 http://x.test/u";
  rec.mentions.push_back({"http://x.test/u", 14, 29, UrlClass::Software});
  CHECK_NOTHROW(validate_record(rec));
}

TEST_CASE("corpus files round-trip") {
  TempDir tmp;
  Corpus corpus;
  corpus.records.push_back(make_record());
  auto second = make_record();
  second.id = "acme/data#2";
  second.mentions[0].label = UrlClass::Software;
  corpus.records.push_back(second);

  const auto path = tmp / "corpus.jsonl";
  save_corpus(corpus, path);
  const Corpus loaded = load_corpus(path);
  REQUIRE(loaded.records.size() == 2);
  CHECK(loaded.records[0].id == "acme/data#1");
  CHECK(loaded.records[1].mentions[0].label == UrlClass::Software);
  CHECK(loaded.total_mentions() == 2);
  CHECK(loaded.find("acme/data#2") != nullptr);
  CHECK(loaded.find("acme/data#9") == nullptr);
}

TEST_CASE("loader reports file and line for malformed rows") {
  TempDir tmp;
  const auto path = tmp / "bad.jsonl";
  write_lines(path, {record_to_json(make_record()).dump(), "{not json"});
  try {
    load_corpus(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    const std::string what = e.what();
    CHECK(what.find("bad.jsonl") != std::string::npos);
    CHECK(what.find(":2") != std::string::npos);
  }
}

TEST_CASE("loader rejects duplicate record ids") {
  TempDir tmp;
  const auto path = tmp / "dup.jsonl";
  const auto row = record_to_json(make_record()).dump();
  write_lines(path, {row, row});
  CHECK_THROWS_WITH_AS(load_corpus(path),
                       doctest::Contains("duplicate record id"), SchemaError);
}

TEST_CASE("loader rejects unknown label spellings") {
  TempDir tmp;
  const auto path = tmp / "label.jsonl";
  auto j = record_to_json(make_record());
  j["mentions"][0]["label"] = "DataSetLink";
  write_lines(path, {j.dump()});
  CHECK_THROWS_WITH_AS(load_corpus(path),
                       doctest::Contains("unrecognized label"), SchemaError);
}

TEST_CASE("class_distribution counts every mention once") {
  Corpus corpus;
  corpus.records.push_back(make_record());
  auto rec = make_record();
  rec.id = "acme/data#2";
  rec.context = "Docs at http://x.test/docs and code http://x.test/code here";
  rec.mentions = {{"http://x.test/docs", 8, 26, UrlClass::Other},
                  {"http://x.test/code", 37, 55, UrlClass::Software}};
  corpus.records.push_back(rec);

  const auto dist = class_distribution(corpus);
  CHECK(dist.at(UrlClass::DatasetDirectLink) == 1);
  CHECK(dist.at(UrlClass::DatasetLandingPage) == 0);
  CHECK(dist.at(UrlClass::Software) == 1);
  CHECK(dist.at(UrlClass::Other) == 1);
}
