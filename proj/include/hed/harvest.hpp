#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hed/corpus.hpp"

namespace hed {

struct RepoRef {
  std::string host = "github.com";
  std::string owner;
  std::string name;
  std::optional<std::string> ref;  // branch/tag/commit; absent = default branch

  // Accepts "owner/name", "host/owner/name", "https://host/owner/name",
  // each optionally suffixed with "@ref".
  static RepoRef parse(std::string_view text);

  std::string canonical() const;  // host/owner/name
  std::string slug() const;       // owner/name
};

struct FetchConfig {
  // Raw-content host queried as {base_url}/{owner}/{name}/{ref}/{file}.
  std::string base_url = "https://raw.githubusercontent.com";
  double timeout_seconds = 30.0;
  int max_retries = 2;
  int backoff_ms = 100;
  std::string token_env;  // env var holding an auth token; "" = anonymous
  std::vector<std::string> readme_names = {"README.md", "README.MD", "readme.md", "README"};

  void validate() const;
};

// Raw README markdown for the repo. Tries each configured filename on the
// requested ref (HEAD when absent, which raw hosts resolve to the default
// branch). Retries transient failures with exponential backoff. Throws
// NotFoundError when no candidate exists, RateLimitedError on 429 after
// retries, TransportError/HttpError otherwise.
std::string fetch_readme(const RepoRef& repo, const FetchConfig& cfg);

struct FetchResult {
  RepoRef repo;
  bool ok = false;
  std::string markdown;  // set when ok
  std::string error;     // set when !ok
};

// fetch_readme over many repos with at most max_in_flight outstanding.
// Results in input order; per-repo failures are entries, not aborts.
std::vector<FetchResult> fetch_many(const std::vector<RepoRef>& repos, const FetchConfig& cfg,
                                    int max_in_flight);

enum class UrlKind {
  Bare,       // http(s)://… token in running text
  Inline,     // [text](url)
  Autolink,   // <url>
  Reference,  // [id]: url definition line
  Image,      // ![alt](url)
  Html,       // href/src attribute inside an embedded tag
};
std::string_view url_kind_name(UrlKind k);

struct UrlHit {
  std::string url;
  std::size_t begin = 0;  // byte offsets into the markdown source
  std::size_t end = 0;
  UrlKind kind = UrlKind::Bare;
};

struct ExtractConfig {
  bool include_code_fences = false;  // URLs inside ``` blocks
  bool include_html = true;          // href/src attributes of embedded tags
};

// All http(s) URLs in document order. Spans are byte ranges into the input,
// strictly increasing and non-overlapping. Bare URLs lose trailing sentence
// punctuation (.,;:)) unless a ')' closes a '(' inside the URL.
std::vector<UrlHit> extract_urls(std::string_view markdown, const ExtractConfig& cfg = {});

struct ContextConfig {
  std::size_t min_context_chars = 80;

  void validate() const;
};

struct BuiltContext {
  std::string context;
  std::size_t start = 0;  // character offsets into context; [start,end) == url
  std::size_t end = 0;
};

// Plain-text context for one extracted URL: the enclosing markdown block
// (link targets kept inline), extended with neighbour blocks — previous
// first, then alternating — until min_context_chars or the document runs
// out. Span is recomputed against the produced context.
BuiltContext build_context(std::string_view markdown, const UrlHit& hit,
                           const ContextConfig& cfg = {});

// One unannotated ContextRecord per extracted URL. Ids are "<slug>#<n>"
// with n counting hits in document order from 1.
std::vector<ContextRecord> harvest_records(std::string_view markdown, const RepoRef& repo,
                                           const ExtractConfig& extract_cfg = {},
                                           const ContextConfig& context_cfg = {});

}  // namespace hed
