#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hed/prompting.hpp"

namespace hed {

struct ClientConfig {
  std::string endpoint = "http://127.0.0.1:8080/v1/chat/completions";
  std::string model = "local-model";
  double temperature = 0.0;
  int max_tokens = 1024;
  double timeout_seconds = 120.0;
  int max_retries = 2;
  int max_in_flight = 4;
  int backoff_ms = 50;      // first retry delay; doubles per attempt
  std::string api_key_env;  // env var holding a bearer token; "" = anonymous

  void validate() const;  // throws ConfigError
  nlohmann::ordered_json to_json() const;
  static ClientConfig from_json(const nlohmann::json& j);
};

enum class BackendKind { Live, Replay };
std::string_view backend_name(BackendKind k);

struct RawOutput {
  std::string record_id;
  std::string fingerprint;
  std::string raw;  // backend text, verbatim and untrimmed; empty on failure
  double latency_ms = 0.0;
  BackendKind backend = BackendKind::Live;
  bool ok = true;
  std::string error;  // set when !ok
};

// Stable 64-bit FNV-1a over the prompt text, as 16 lowercase hex digits.
// Keys the replay store and makes identical prompts cacheable.
std::string prompt_fingerprint(std::string_view prompt_text);

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  // Returns the completion text verbatim; throws on any failure.
  virtual std::string complete_text(const std::string& prompt) = 0;
  virtual BackendKind kind() const = 0;
};

// POSTs a chat-completion request and returns the first choice's text.
class HttpChatBackend : public CompletionBackend {
 public:
  explicit HttpChatBackend(ClientConfig cfg);
  std::string complete_text(const std::string& prompt) override;
  BackendKind kind() const override { return BackendKind::Live; }

 private:
  ClientConfig cfg_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

// Deterministic store mapping prompt fingerprints to recorded raw outputs.
class ReplayBackend : public CompletionBackend {
 public:
  explicit ReplayBackend(const std::filesystem::path& store_path);
  std::string complete_text(const std::string& prompt) override;
  BackendKind kind() const override { return BackendKind::Replay; }

  std::size_t size() const { return store_.size(); }

 private:
  std::unordered_map<std::string, std::string> store_;
};

// One completion with retries: transient failures (connect errors, timeouts,
// 408/429/5xx) are retried up to cfg.max_retries with exponential backoff;
// anything else, including a replay miss, propagates immediately.
RawOutput complete(CompletionBackend& backend, const RenderedPrompt& prompt,
                   const ClientConfig& cfg);

// Runs every prompt with at most cfg.max_in_flight outstanding at once.
// Outputs come back in input order; per-record failures become entries with
// ok=false instead of aborting the batch. When log_path is non-empty every
// result is appended there (completion order, after a config header line)
// before the call returns.
std::vector<RawOutput> run_batch(CompletionBackend& backend,
                                 std::span<const RenderedPrompt> prompts,
                                 const ClientConfig& cfg,
                                 const std::filesystem::path& log_path = {});

// Writes successful outputs as replay-store JSONL ({"fingerprint","raw"}),
// first occurrence wins on duplicate fingerprints.
void dump_replay_store(std::span<const RawOutput> outputs,
                       const std::filesystem::path& path);

nlohmann::ordered_json raw_output_to_json(const RawOutput& out);
RawOutput raw_output_from_json(const nlohmann::json& j);

}  // namespace hed
