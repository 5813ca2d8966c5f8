#include "absa/llm_client.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <thread>

#include <json.hpp>

#include "absa/text.hpp"

namespace absa {
namespace {

using nlohmann::json;

void append_field(std::string& out, std::string_view field) {
  out += std::to_string(field.size());
  out += ':';
  out += field;
}

// RAII slot in the bounded in-flight window.
class SlotGuard {
 public:
  SlotGuard(std::mutex& mu, std::condition_variable& cv, int& in_flight, int limit)
      : mu_(mu), cv_(cv), in_flight_(in_flight) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < limit; });
    ++in_flight_;
  }
  ~SlotGuard() {
    {
      std::lock_guard lock(mu_);
      --in_flight_;
    }
    cv_.notify_one();
  }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::mutex& mu_;
  std::condition_variable& cv_;
  int& in_flight_;
};

}  // namespace

std::string_view to_string(CacheMode m) {
  switch (m) {
    case CacheMode::live: return "live";
    case CacheMode::replay: return "replay";
    case CacheMode::record: return "record";
  }
  return "replay";
}

std::optional<CacheMode> parse_cache_mode(std::string_view s) {
  if (s == "live") return CacheMode::live;
  if (s == "replay") return CacheMode::replay;
  if (s == "record") return CacheMode::record;
  return std::nullopt;
}

std::string_view to_string(RoleLayout r) {
  return r == RoleLayout::single_user ? "single-user" : "system-user";
}

std::optional<RoleLayout> parse_role_layout(std::string_view s) {
  if (s == "single-user") return RoleLayout::single_user;
  if (s == "system-user") return RoleLayout::system_user;
  return std::nullopt;
}

std::string cache_key(std::string_view model, double temperature, std::string_view prompt) {
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.17g", temperature == 0.0 ? 0.0 : temperature);
  std::string buf = "acos-cache-v1\n";
  append_field(buf, model);
  append_field(buf, temp);
  append_field(buf, prompt);
  return text::sha256_hex(buf);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  std::string line;
  std::size_t line_no = 0;
  while (in && std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      CacheEntry e{j.at("key").get<std::string>(), j.at("response").get<std::string>(),
                   j.value("recorded_at", std::string{})};
      entries_[e.key] = std::move(e);
    } catch (const json::exception& e) {
      throw std::runtime_error(path_.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!path_.parent_path().empty()) std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw std::runtime_error("cannot open cache file " + path_.string());
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.response;
}

void ResponseCache::store(CacheEntry entry) {
  std::unique_lock lock(mu_);
  if (out_.is_open()) {
    const json j = {{"key", entry.key}, {"response", entry.response}, {"recorded_at", entry.recorded_at}};
    out_ << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("failed writing cache file " + path_.string());
  }
  entries_[entry.key] = std::move(entry);
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

CompletionError::CompletionError(CompletionErrorKind kind, const std::string& message, int status, std::string digest)
    : std::runtime_error(message), kind_(kind), status_(status), digest_(std::move(digest)) {}

std::string build_request_body(std::string_view prompt, const CompletionConfig& config) {
  json messages = json::array();
  const std::size_t split = config.role_layout == RoleLayout::system_user ? prompt.find("\nInput: ") : std::string_view::npos;
  if (split == std::string_view::npos) {
    messages.push_back({{"role", "user"}, {"content", std::string(prompt)}});
  } else {
    messages.push_back({{"role", "system"}, {"content", std::string(prompt.substr(0, split))}});
    messages.push_back({{"role", "user"}, {"content", std::string(prompt.substr(split + 1))}});
  }
  const json body = {{"model", config.model}, {"temperature", config.temperature}, {"messages", std::move(messages)}};
  return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string extract_content(std::string_view response_body) {
  try {
    const json j = json::parse(response_body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return {};
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw CompletionError(CompletionErrorKind::api_error, "malformed chat-completion response");
  }
}

bool is_retryable(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

http::Response HttpChatTransport::send(const std::string& request_body, const CompletionConfig& config) {
  const char* key = std::getenv(config.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw CompletionError(CompletionErrorKind::config, "environment variable " + config.api_key_env + " is not set");
  }
  const http::Headers headers = {{"Authorization", std::string("Bearer ") + key}};
  return http::post_json(http::parse_url(config.endpoint), request_body, headers, config.request_timeout);
}

LlmClient::LlmClient(CompletionConfig config, CacheMode mode, std::shared_ptr<ResponseCache> cache,
                     std::shared_ptr<ChatTransport> transport, std::uint64_t jitter_seed)
    : config_(std::move(config)),
      mode_(mode),
      cache_(std::move(cache)),
      transport_(std::move(transport)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      rng_(jitter_seed) {
  if (config_.temperature < 0.0) throw CompletionError(CompletionErrorKind::config, "temperature must be >= 0");
  if (config_.max_retries < 0) throw CompletionError(CompletionErrorKind::config, "max_retries must be >= 0");
  if (config_.max_concurrency < 1) config_.max_concurrency = 1;
  if (mode_ != CacheMode::live && !cache_) {
    throw CompletionError(CompletionErrorKind::config, std::string(to_string(mode_)) + " mode needs a cache");
  }
  if (mode_ != CacheMode::replay && !transport_) {
    throw CompletionError(CompletionErrorKind::config, std::string(to_string(mode_)) + " mode needs a transport");
  }
}

std::string LlmClient::key_for(std::string_view prompt) const {
  return cache_key(config_.model, config_.temperature, prompt);
}

std::string LlmClient::complete(const std::string& prompt) {
  const std::string digest = key_for(prompt);
  if (mode_ != CacheMode::live) {
    if (auto hit = cache_->lookup(digest)) {
      ++cache_hits_;
      return *hit;
    }
    if (mode_ == CacheMode::replay) {
      throw CompletionError(CompletionErrorKind::cache_miss, "cache miss for " + digest, 0, digest);
    }
  }
  std::string response = call_backend(prompt, digest);
  if (mode_ == CacheMode::record) cache_->store({digest, response, utc_timestamp()});
  return response;
}

std::chrono::milliseconds LlmClient::backoff(int attempt) {
  const auto base = config_.backoff_base.count();
  const auto scaled = base << std::min(attempt, 20);
  std::int64_t jitter = 0;
  if (base > 0) {
    std::lock_guard lock(rng_mu_);
    jitter = static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(base));
  }
  return std::chrono::milliseconds(scaled + jitter);
}

std::string LlmClient::scrub(std::string s) const {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') return s;
  const std::string k(key);
  for (auto pos = s.find(k); pos != std::string::npos; pos = s.find(k, pos)) s.replace(pos, k.size(), "[redacted]");
  return s;
}

std::string LlmClient::call_backend(const std::string& prompt, const std::string& digest) {
  SlotGuard slot(slots_mu_, slots_cv_, in_flight_, config_.max_concurrency);
  const std::string body = build_request_body(prompt, config_);
  std::string last_failure;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) sleeper_(backoff(attempt - 1));
    ++live_calls_;
    const http::Response res = transport_->send(body, config_);
    if (res.status == 200) return extract_content(res.body);
    if (!is_retryable(res.status)) {
      throw CompletionError(CompletionErrorKind::api_error,
                            scrub("HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 300)),
                            res.status, digest);
    }
    last_failure = res.status == 0 ? "transport error: " + res.error : "HTTP " + std::to_string(res.status);
  }
  throw CompletionError(CompletionErrorKind::retries_exhausted,
                        scrub("retries exhausted after " + std::to_string(config_.max_retries + 1) +
                              " attempts, last: " + last_failure),
                        0, digest);
}

}  // namespace absa
