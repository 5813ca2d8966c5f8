#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include "absa/http.hpp"

namespace absa {

enum class CacheMode { live, replay, record };
std::string_view to_string(CacheMode m);
std::optional<CacheMode> parse_cache_mode(std::string_view s);

// single_user sends the whole prompt as one user message. system_user moves
// everything before the first "Input:" line into a system message.
enum class RoleLayout { single_user, system_user };
std::string_view to_string(RoleLayout r);
std::optional<RoleLayout> parse_role_layout(std::string_view s);

struct CompletionConfig {
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_retries = 5;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::milliseconds request_timeout{60000};
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  // Name of the environment variable holding the API key.
  std::string api_key_env = "OPENAI_API_KEY";
  RoleLayout role_layout = RoleLayout::single_user;
  int max_concurrency = 1;
};

// Hex sha256 over a length-prefixed encoding of (model, temperature, prompt).
std::string cache_key(std::string_view model, double temperature, std::string_view prompt);

struct CacheEntry {
  std::string key;
  std::string response;
  std::string recorded_at;  // ISO-8601 UTC
};

// JSONL-backed response cache. Reads may run concurrently; writes are
// serialized and appended to the file immediately. Later lines win when a
// file repeats a key.
class ResponseCache {
 public:
  ResponseCache() = default;  // in-memory only
  explicit ResponseCache(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(CacheEntry entry);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, CacheEntry> entries_;
  std::ofstream out_;
};

enum class CompletionErrorKind { cache_miss, retries_exhausted, api_error, config };

class CompletionError : public std::runtime_error {
 public:
  CompletionError(CompletionErrorKind kind, const std::string& message, int status = 0, std::string digest = {});
  CompletionErrorKind kind() const { return kind_; }
  int status() const { return status_; }
  const std::string& digest() const { return digest_; }

 private:
  CompletionErrorKind kind_;
  int status_;
  std::string digest_;
};

// Chat-completion request body for the configured role layout.
std::string build_request_body(std::string_view prompt, const CompletionConfig& config);
// choices[0].message.content; throws CompletionError(api_error) otherwise.
std::string extract_content(std::string_view response_body);
// Timeouts, connection failures, 408, 429 and 5xx.
bool is_retryable(int status);

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual http::Response send(const std::string& request_body, const CompletionConfig& config) = 0;
};

// Reads the API key from the environment on every call; it never leaves the
// Authorization header.
class HttpChatTransport : public ChatTransport {
 public:
  http::Response send(const std::string& request_body, const CompletionConfig& config) override;
};

class LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  // transport may be null in replay mode.
  LlmClient(CompletionConfig config, CacheMode mode, std::shared_ptr<ResponseCache> cache,
            std::shared_ptr<ChatTransport> transport, std::uint64_t jitter_seed = 0);

  // replay: cache only. record: cache hit, else live call then persist.
  // live: always calls the backend and never touches the cache.
  std::string complete(const std::string& prompt);

  std::string key_for(std::string_view prompt) const;
  void set_sleeper(Sleeper s) { sleeper_ = std::move(s); }

  const CompletionConfig& config() const { return config_; }
  CacheMode mode() const { return mode_; }
  std::size_t live_calls() const { return live_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::string call_backend(const std::string& prompt, const std::string& digest);
  std::chrono::milliseconds backoff(int attempt);
  std::string scrub(std::string s) const;

  CompletionConfig config_;
  CacheMode mode_;
  std::shared_ptr<ResponseCache> cache_;
  std::shared_ptr<ChatTransport> transport_;
  Sleeper sleeper_;

  std::mutex rng_mu_;
  std::mt19937_64 rng_;

  std::mutex slots_mu_;
  std::condition_variable slots_cv_;
  int in_flight_ = 0;

  std::atomic<std::size_t> live_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

std::string utc_timestamp();

}  // namespace absa
