#include "hed/harvest.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "hed/errors.hpp"

namespace hed {
namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    parts.emplace_back(s.substr(start, end - start));
    if (end == s.size()) break;
    start = end + 1;
  }
  return parts;
}

std::pair<std::string, std::string> split_base(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("base_url must include a scheme: " + base_url);
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string path = base_url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {base_url.substr(0, path_start), path};
}

std::string body_excerpt(const std::string& body, std::size_t limit = 200) {
  if (body.size() <= limit) return body;
  return body.substr(0, limit) + "...";
}

}  // namespace

RepoRef RepoRef::parse(std::string_view text) {
  std::string s(text);
  // trim
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                        s.back() == '\n' || s.back() == '/')) {
    s.pop_back();
  }
  if (auto p = s.find("://"); p != std::string::npos) s.erase(0, p + 3);

  RepoRef ref;
  if (auto at = s.rfind('@'); at != std::string::npos && at > s.rfind('/')) {
    ref.ref = s.substr(at + 1);
    s.erase(at);
    if (ref.ref->empty()) {
      throw SchemaError("empty ref in repo reference '" + std::string(text) + "'");
    }
  }

  const auto parts = split(s, '/');
  if (parts.size() == 2) {
    ref.owner = parts[0];
    ref.name = parts[1];
  } else if (parts.size() == 3) {
    ref.host = parts[0];
    ref.owner = parts[1];
    ref.name = parts[2];
  } else {
    throw SchemaError("repo reference '" + std::string(text) +
                      "' is not owner/name or host/owner/name");
  }
  if (ref.name.size() > 4 && ref.name.ends_with(".git")) {
    ref.name.resize(ref.name.size() - 4);
  }
  if (ref.host.empty() || ref.owner.empty() || ref.name.empty()) {
    throw SchemaError("repo reference '" + std::string(text) + "' has empty components");
  }
  return ref;
}

std::string RepoRef::canonical() const { return host + "/" + owner + "/" + name; }

std::string RepoRef::slug() const { return owner + "/" + name; }

void FetchConfig::validate() const {
  if (timeout_seconds <= 0.0) throw ConfigError("fetch timeout must be positive");
  if (max_retries < 0) throw ConfigError("fetch max_retries must be >= 0");
  if (backoff_ms < 0) throw ConfigError("fetch backoff_ms must be >= 0");
  if (readme_names.empty()) throw ConfigError("fetch readme_names must not be empty");
  split_base(base_url);
}

std::string fetch_readme(const RepoRef& repo, const FetchConfig& cfg) {
  cfg.validate();
  const auto [base, base_path] = split_base(cfg.base_url);

  httplib::Client client(base);
  const auto timeout = std::chrono::duration<double>(cfg.timeout_seconds);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_follow_location(true);

  httplib::Headers headers;
  if (!cfg.token_env.empty()) {
    if (const char* token = std::getenv(cfg.token_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  // raw hosts resolve HEAD to the repository's default branch
  const std::string ref = repo.ref.value_or("HEAD");

  for (const auto& file : cfg.readme_names) {
    const std::string path =
        base_path + "/" + repo.owner + "/" + repo.name + "/" + ref + "/" + file;
    int delay_ms = cfg.backoff_ms;
    for (int attempt = 0;; ++attempt) {
      std::optional<std::string> failure;
      std::optional<long> retry_after;
      bool rate_limited = false;
      auto res = client.Get(path, headers);
      if (!res) {
        failure = "GET " + base + path + " failed: " + httplib::to_string(res.error());
      } else if (res->status == 200) {
        return res->body;
      } else if (res->status == 404) {
        break;  // try the next filename
      } else if (res->status == 429) {
        failure = "GET " + base + path + " rate limited (429)";
        rate_limited = true;
        if (res->has_header("Retry-After")) {
          try {
            retry_after = std::stol(res->get_header_value("Retry-After"));
          } catch (const std::exception&) {
          }
        }
      } else if (res->status == 408 || res->status >= 500) {
        failure = "GET " + base + path + " returned status " + std::to_string(res->status);
      } else {
        throw HttpError(res->status, body_excerpt(res->body),
                        "GET " + base + path + " returned status " +
                            std::to_string(res->status));
      }

      if (attempt >= cfg.max_retries) {
        const std::string msg =
            *failure + " after " + std::to_string(attempt + 1) + " attempts";
        if (rate_limited) throw RateLimitedError(msg, retry_after);
        throw TransportError(msg);
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      delay_ms *= 2;
    }
  }
  throw NotFoundError("no README found for " + repo.canonical() + " at ref " + ref);
}

std::vector<FetchResult> fetch_many(const std::vector<RepoRef>& repos, const FetchConfig& cfg,
                                    int max_in_flight) {
  cfg.validate();
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  std::vector<FetchResult> results(repos.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= repos.size()) return;
      FetchResult& r = results[i];
      r.repo = repos[i];
      try {
        r.markdown = fetch_readme(repos[i], cfg);
        r.ok = true;
      } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
      }
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(max_in_flight), repos.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return results;
}

}  // namespace hed
