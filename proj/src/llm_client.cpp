#include "hed/llm_client.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "hed/errors.hpp"
#include "hed/jsonl.hpp"

namespace hed {
namespace {

std::string body_excerpt(const std::string& body, std::size_t limit = 200) {
  if (body.size() <= limit) return body;
  return body.substr(0, limit) + "...";
}

// "http://host:8080/v1/chat" -> {"http://host:8080", "/v1/chat"}
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint must include a scheme: " + endpoint);
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

std::string first_choice_text(const std::string& body) {
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw SchemaError("completion response is not JSON: " + body_excerpt(body));
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw SchemaError("completion response has no choices: " + body_excerpt(body));
  }
  const auto& first = (*choices)[0];
  if (first.contains("message") && first["message"].contains("content") &&
      first["message"]["content"].is_string()) {
    return first["message"]["content"].get<std::string>();
  }
  if (first.contains("text") && first["text"].is_string()) {
    return first["text"].get<std::string>();
  }
  throw SchemaError("completion choice has neither message.content nor text: " +
                    body_excerpt(body));
}

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

void ClientConfig::validate() const {
  if (endpoint.empty()) throw ConfigError("client endpoint must not be empty");
  if (model.empty()) throw ConfigError("client model must not be empty");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  if (timeout_seconds <= 0.0) throw ConfigError("timeout must be positive");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  if (backoff_ms < 0) throw ConfigError("backoff_ms must be >= 0");
  split_endpoint(endpoint);
}

nlohmann::ordered_json ClientConfig::to_json() const {
  return nlohmann::ordered_json{{"endpoint", endpoint},
                                {"model", model},
                                {"temperature", temperature},
                                {"max_tokens", max_tokens},
                                {"timeout_seconds", timeout_seconds},
                                {"max_retries", max_retries},
                                {"max_in_flight", max_in_flight},
                                {"backoff_ms", backoff_ms},
                                {"api_key_env", api_key_env}};
}

ClientConfig ClientConfig::from_json(const nlohmann::json& j) {
  ClientConfig cfg;
  if (j.contains("endpoint")) cfg.endpoint = j.at("endpoint").get<std::string>();
  if (j.contains("model")) cfg.model = j.at("model").get<std::string>();
  if (j.contains("temperature")) cfg.temperature = j.at("temperature").get<double>();
  if (j.contains("max_tokens")) cfg.max_tokens = j.at("max_tokens").get<int>();
  if (j.contains("timeout_seconds")) cfg.timeout_seconds = j.at("timeout_seconds").get<double>();
  if (j.contains("max_retries")) cfg.max_retries = j.at("max_retries").get<int>();
  if (j.contains("max_in_flight")) cfg.max_in_flight = j.at("max_in_flight").get<int>();
  if (j.contains("backoff_ms")) cfg.backoff_ms = j.at("backoff_ms").get<int>();
  if (j.contains("api_key_env")) cfg.api_key_env = j.at("api_key_env").get<std::string>();
  cfg.validate();
  return cfg;
}

std::string_view backend_name(BackendKind k) {
  return k == BackendKind::Live ? "live" : "replay";
}

std::string prompt_fingerprint(std::string_view prompt_text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : prompt_text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

HttpChatBackend::HttpChatBackend(ClientConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::tie(base_, path_) = split_endpoint(cfg_.endpoint);
}

std::string HttpChatBackend::complete_text(const std::string& prompt) {
  httplib::Client client(base_);
  const auto timeout = std::chrono::duration<double>(cfg_.timeout_seconds);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!cfg_.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const nlohmann::ordered_json body{
      {"model", cfg_.model},
      {"messages", nlohmann::ordered_json::array(
                       {nlohmann::ordered_json{{"role", "user"}, {"content", prompt}}})},
      {"temperature", cfg_.temperature},
      {"max_tokens", cfg_.max_tokens}};

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError("POST " + cfg_.endpoint +
                         " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429) {
    std::optional<long> retry_after;
    if (res->has_header("Retry-After")) {
      try {
        retry_after = std::stol(res->get_header_value("Retry-After"));
      } catch (const std::exception&) {
      }
    }
    throw RateLimitedError("POST " + cfg_.endpoint + " rate limited (429)", retry_after);
  }
  if (res->status != 200) {
    throw HttpError(res->status, body_excerpt(res->body),
                    "POST " + cfg_.endpoint + " returned status " +
                        std::to_string(res->status));
  }
  return first_choice_text(res->body);
}

ReplayBackend::ReplayBackend(const std::filesystem::path& store_path) {
  jsonl::for_each(store_path, [&](std::size_t line, const nlohmann::json& j) {
    if (!j.contains("fingerprint") || !j.contains("raw")) {
      throw SchemaError(store_path.string() + ":" + std::to_string(line) +
                        ": replay entries need fingerprint and raw");
    }
    // first occurrence wins, matching dump_replay_store
    store_.emplace(j.at("fingerprint").get<std::string>(), j.at("raw").get<std::string>());
  });
}

std::string ReplayBackend::complete_text(const std::string& prompt) {
  const std::string fp = prompt_fingerprint(prompt);
  const auto it = store_.find(fp);
  if (it == store_.end()) {
    throw ReplayMissError("replay store has no entry for fingerprint " + fp, fp);
  }
  return it->second;
}

RawOutput complete(CompletionBackend& backend, const RenderedPrompt& prompt,
                   const ClientConfig& cfg) {
  cfg.validate();
  RawOutput out;
  out.record_id = prompt.target_id;
  out.fingerprint = prompt_fingerprint(prompt.text);
  out.backend = backend.kind();

  const auto start = std::chrono::steady_clock::now();
  int delay_ms = cfg.backoff_ms;
  for (int attempt = 0;; ++attempt) {
    try {
      out.raw = backend.complete_text(prompt.text);
      out.latency_ms = ms_since(start);
      return out;
    } catch (const ReplayMissError& e) {
      throw ReplayMissError("record '" + prompt.target_id + "': " + e.what(),
                            e.fingerprint());
    } catch (const std::exception& e) {
      if (!is_transient(e) || attempt >= cfg.max_retries) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      delay_ms *= 2;
    }
  }
}

std::vector<RawOutput> run_batch(CompletionBackend& backend,
                                 std::span<const RenderedPrompt> prompts,
                                 const ClientConfig& cfg,
                                 const std::filesystem::path& log_path) {
  cfg.validate();
  std::vector<RawOutput> outputs(prompts.size());

  std::mutex log_mutex;
  const bool logging = !log_path.empty();
  if (logging) {
    if (const auto dir = log_path.parent_path(); !dir.empty()) {
      std::filesystem::create_directories(dir);
    }
    jsonl::append_line(log_path, nlohmann::ordered_json{{"type", "config"},
                                                        {"backend", backend_name(backend.kind())},
                                                        {"config", cfg.to_json()}});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= prompts.size()) return;
      RawOutput out;
      try {
        out = complete(backend, prompts[i], cfg);
      } catch (const std::exception& e) {
        out.record_id = prompts[i].target_id;
        out.fingerprint = prompt_fingerprint(prompts[i].text);
        out.backend = backend.kind();
        out.ok = false;
        out.error = e.what();
      }
      if (logging) {
        std::scoped_lock lock(log_mutex);
        jsonl::append_line(log_path, raw_output_to_json(out));
      }
      outputs[i] = std::move(out);
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.max_in_flight), prompts.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return outputs;
}

void dump_replay_store(std::span<const RawOutput> outputs,
                       const std::filesystem::path& path) {
  std::vector<nlohmann::ordered_json> rows;
  std::unordered_map<std::string, bool> seen;
  for (const auto& out : outputs) {
    if (!out.ok) continue;
    if (seen.emplace(out.fingerprint, true).second) {
      rows.push_back(nlohmann::ordered_json{{"fingerprint", out.fingerprint}, {"raw", out.raw}});
    }
  }
  jsonl::write_lines_atomic(path, rows);
}

nlohmann::ordered_json raw_output_to_json(const RawOutput& out) {
  nlohmann::ordered_json j{{"type", "output"},
                           {"record_id", out.record_id},
                           {"fingerprint", out.fingerprint},
                           {"backend", std::string(backend_name(out.backend))},
                           {"ok", out.ok},
                           {"latency_ms", out.latency_ms}};
  if (out.ok) {
    j["raw"] = out.raw;
  } else {
    j["error"] = out.error;
  }
  return j;
}

RawOutput raw_output_from_json(const nlohmann::json& j) {
  RawOutput out;
  out.record_id = j.at("record_id").get<std::string>();
  out.fingerprint = j.at("fingerprint").get<std::string>();
  out.backend =
      j.value("backend", "live") == std::string("replay") ? BackendKind::Replay : BackendKind::Live;
  out.ok = j.value("ok", true);
  out.latency_ms = j.value("latency_ms", 0.0);
  if (out.ok) {
    out.raw = j.value("raw", "");
  } else {
    out.error = j.value("error", "");
  }
  return out;
}

}  // namespace hed
