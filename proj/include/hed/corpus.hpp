#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hed {

// The four-way label taxonomy for URL mentions.
enum class UrlClass {
  DatasetDirectLink,   // URL downloads dataset files or archives directly
  DatasetLandingPage,  // page/directory/repository through which a dataset is obtained
  Software,            // software snippets, notebooks, source code repositories
  Other,               // none of the above
};

inline constexpr UrlClass kAllClasses[] = {
    UrlClass::DatasetDirectLink, UrlClass::DatasetLandingPage,
    UrlClass::Software, UrlClass::Other};

// Canonical on-disk name, e.g. "DatasetDirectLink".
std::string_view canonical_name(UrlClass c);

// Lowercase underscore spelling used in prompt example outputs,
// e.g. "dataset_direct_link".
std::string_view prompt_label(UrlClass c);

// Case- and separator-insensitive label lookup: strips '_', '-' and spaces,
// casefolds, then matches against the known aliases. Unrecognized strings
// yield nullopt (Unknown) — never a guessed class.
std::optional<UrlClass> normalize_label(std::string_view raw);

// True iff c refers to a dataset (DatasetDirectLink or DatasetLandingPage).
bool binary_label(UrlClass c);

// One annotated URL occurrence inside a context text. start/end are
// character offsets (Unicode scalar values) with context.substr(start, end)
// equal to url byte-for-byte. label is empty only for unannotated drafts
// produced by the harvester.
struct Mention {
  std::string url;
  std::size_t start = 0;
  std::size_t end = 0;
  std::optional<UrlClass> label;
};

// One README-derived context with its gold mentions in document order.
struct ContextRecord {
  std::string id;
  std::string repo;
  std::string context;
  std::vector<Mention> mentions;
};

struct Corpus {
  std::vector<ContextRecord> records;

  std::size_t total_mentions() const;
  const ContextRecord* find(std::string_view id) const;
};

struct LoadOptions {
  // Accept records whose mentions carry an empty label string (harvester
  // output awaiting annotation). Gold corpora are loaded strictly.
  bool allow_unlabeled = false;
};

// Throws SchemaError naming the record id and the violated invariant.
void validate_record(const ContextRecord& rec, bool allow_unlabeled = false);

// Loads a JSONL corpus file, validating every invariant. Errors carry the
// file/line for malformed lines and the record id for invariant violations.
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& opts = {});

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

nlohmann::ordered_json record_to_json(const ContextRecord& rec);
ContextRecord record_from_json(const nlohmann::json& j, bool allow_unlabeled = false);

// Mention counts per class; counts sum to total_mentions(). Requires a
// fully labeled corpus.
std::map<UrlClass, std::size_t> class_distribution(const Corpus& corpus);

}  // namespace hed
