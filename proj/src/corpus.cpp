#include "hed/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "hed/errors.hpp"
#include "hed/jsonl.hpp"
#include "hed/utf8.hpp"

namespace hed {
namespace {

std::string fold_key(std::string_view raw) {
  std::string key;
  key.reserve(raw.size());
  for (char ch : raw) {
    if (ch == '_' || ch == '-' || ch == ' ') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return key;
}

std::string require_string(const nlohmann::json& j, const char* field,
                           const std::string& where) {
  if (!j.contains(field) || !j.at(field).is_string()) {
    throw SchemaError(where + ": missing or non-string field '" + field + "'");
  }
  return j.at(field).get<std::string>();
}

std::size_t require_uint(const nlohmann::json& j, const char* field,
                         const std::string& where) {
  if (!j.contains(field) || !j.at(field).is_number_integer() ||
      j.at(field).get<long long>() < 0) {
    throw SchemaError(where + ": missing or non-integer field '" + field + "'");
  }
  return static_cast<std::size_t>(j.at(field).get<long long>());
}

}  // namespace

std::string_view canonical_name(UrlClass c) {
  switch (c) {
    case UrlClass::DatasetDirectLink: return "DatasetDirectLink";
    case UrlClass::DatasetLandingPage: return "DatasetLandingPage";
    case UrlClass::Software: return "Software";
    case UrlClass::Other: return "Other";
  }
  return "Other";
}

std::string_view prompt_label(UrlClass c) {
  switch (c) {
    case UrlClass::DatasetDirectLink: return "dataset_direct_link";
    case UrlClass::DatasetLandingPage: return "dataset_landing_page";
    case UrlClass::Software: return "software";
    case UrlClass::Other: return "other";
  }
  return "other";
}

std::optional<UrlClass> normalize_label(std::string_view raw) {
  const std::string key = fold_key(raw);
  for (UrlClass c : kAllClasses) {
    if (key == fold_key(canonical_name(c))) return c;
  }
  return std::nullopt;
}

bool binary_label(UrlClass c) {
  return c == UrlClass::DatasetDirectLink || c == UrlClass::DatasetLandingPage;
}

std::size_t Corpus::total_mentions() const {
  std::size_t n = 0;
  for (const auto& rec : records) n += rec.mentions.size();
  return n;
}

const ContextRecord* Corpus::find(std::string_view id) const {
  for (const auto& rec : records) {
    if (rec.id == id) return &rec;
  }
  return nullptr;
}

void validate_record(const ContextRecord& rec, bool allow_unlabeled) {
  const std::string where = "record '" + rec.id + "'";
  if (rec.id.empty()) throw SchemaError("record with empty id");
  if (!utf8::valid(rec.context)) throw SchemaError(where + ": context is not valid UTF-8");
  if (rec.mentions.empty()) throw SchemaError(where + ": mentions must be non-empty");

  const std::size_t context_len = utf8::length(rec.context);
  std::size_t prev_end = 0;
  bool first = true;
  for (std::size_t i = 0; i < rec.mentions.size(); ++i) {
    const Mention& m = rec.mentions[i];
    const std::string mwhere = where + " mention " + std::to_string(i);
    if (m.url.empty()) throw SchemaError(mwhere + ": empty url");
    if (!(m.start < m.end) || m.end > context_len) {
      throw SchemaError(mwhere + ": span [" + std::to_string(m.start) + ", " +
                        std::to_string(m.end) + ") out of bounds for context of " +
                        std::to_string(context_len) + " chars");
    }
    if (!first && m.start < prev_end) {
      throw SchemaError(mwhere + ": overlaps previous mention or is out of order");
    }
    const std::string_view sub = utf8::substr(rec.context, m.start, m.end);
    if (sub != m.url) {
      throw SchemaError(mwhere + ": context substring '" + std::string(sub) +
                        "' != url '" + m.url + "'");
    }
    if (!m.label.has_value() && !allow_unlabeled) {
      throw SchemaError(mwhere + ": missing label");
    }
    prev_end = m.end;
    first = false;
  }
}

ContextRecord record_from_json(const nlohmann::json& j, bool allow_unlabeled) {
  ContextRecord rec;
  rec.id = require_string(j, "id", "record");
  const std::string where = "record '" + rec.id + "'";
  rec.repo = require_string(j, "repo", where);
  rec.context = require_string(j, "context", where);
  if (!j.contains("mentions") || !j.at("mentions").is_array()) {
    throw SchemaError(where + ": missing 'mentions' array");
  }
  for (const auto& mj : j.at("mentions")) {
    Mention m;
    m.url = require_string(mj, "url", where);
    m.start = require_uint(mj, "start", where);
    m.end = require_uint(mj, "end", where);
    const std::string raw_label = require_string(mj, "label", where);
    if (raw_label.empty()) {
      if (!allow_unlabeled) throw SchemaError(where + ": empty label");
      m.label = std::nullopt;
    } else {
      m.label = normalize_label(raw_label);
      if (!m.label) throw SchemaError(where + ": unrecognized label '" + raw_label + "'");
    }
    rec.mentions.push_back(std::move(m));
  }
  validate_record(rec, allow_unlabeled);
  return rec;
}

nlohmann::ordered_json record_to_json(const ContextRecord& rec) {
  nlohmann::ordered_json j;
  j["id"] = rec.id;
  j["repo"] = rec.repo;
  j["context"] = rec.context;
  auto mentions = nlohmann::ordered_json::array();
  for (const auto& m : rec.mentions) {
    nlohmann::ordered_json mj;
    mj["url"] = m.url;
    mj["start"] = m.start;
    mj["end"] = m.end;
    mj["label"] = m.label ? std::string(canonical_name(*m.label)) : std::string();
    mentions.push_back(std::move(mj));
  }
  j["mentions"] = std::move(mentions);
  return j;
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& opts) {
  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  jsonl::for_each(path, [&](std::size_t line_no, const nlohmann::json& j) {
    ContextRecord rec;
    try {
      rec = record_from_json(j, opts.allow_unlabeled);
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen_ids.insert(rec.id).second) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                        ": duplicate record id '" + rec.id + "'");
    }
    corpus.records.push_back(std::move(rec));
  });
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::vector<nlohmann::ordered_json> rows;
  rows.reserve(corpus.records.size());
  for (const auto& rec : corpus.records) rows.push_back(record_to_json(rec));
  jsonl::write_lines_atomic(path, rows);
}

std::map<UrlClass, std::size_t> class_distribution(const Corpus& corpus) {
  std::map<UrlClass, std::size_t> counts;
  for (UrlClass c : kAllClasses) counts[c] = 0;
  for (const auto& rec : corpus.records) {
    for (const auto& m : rec.mentions) {
      if (!m.label) {
        throw SchemaError("record '" + rec.id + "' has an unlabeled mention");
      }
      ++counts[*m.label];
    }
  }
  return counts;
}

}  // namespace hed
