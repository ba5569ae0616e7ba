#ifndef PROMPTCOREF_LLM_HPP
#define PROMPTCOREF_LLM_HPP

// Completion backends behind a single contract:
//   HttpBackend      OpenAI-compatible POST /v1/completions, with response cache
//   ReplayBackend    recorded completions keyed by prompt digest
//   EchoGoldBackend  answers from the gold annotation (test oracle)
//
// Decoding is greedy: every request carries temperature 0.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "promptcoref/corpus.hpp"
#include "promptcoref/prompting.hpp"
#include "promptcoref/text.hpp"

namespace promptcoref::llm {

struct CompletionRequest {
  std::string prompt;
  std::size_t max_output_tokens = 256;
  double temperature = 0.0;
  std::string model_name;
  std::vector<std::string> stop_sequences;
};

enum class FinishReason { stop, length, error };

inline std::string_view to_string(FinishReason r) {
  switch (r) {
    case FinishReason::stop:
      return "stop";
    case FinishReason::length:
      return "length";
    case FinishReason::error:
      return "error";
  }
  return "error";
}

inline FinishReason parse_finish_reason(std::string_view s) {
  if (s == "length") return FinishReason::length;
  if (s == "error") return FinishReason::error;
  return FinishReason::stop;
}

struct Usage {
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

struct CompletionResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::stop;
  Usage usage;
  std::string backend_id;
  bool from_cache = false;

  bool truncated() const { return finish_reason == FinishReason::length; }
};

inline nlohmann::json to_json(const CompletionResponse& r) {
  return {{"text", r.text},
          {"finish_reason", to_string(r.finish_reason)},
          {"usage", {{"prompt_tokens", r.usage.prompt_tokens}, {"completion_tokens", r.usage.completion_tokens}}},
          {"backend_id", r.backend_id}};
}

inline CompletionResponse response_from_json(const nlohmann::json& j) {
  CompletionResponse r;
  r.text = j.at("text").get<std::string>();
  r.finish_reason = parse_finish_reason(j.value("finish_reason", "stop"));
  if (j.contains("usage")) {
    r.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::size_t{0});
    r.usage.completion_tokens = j["usage"].value("completion_tokens", std::size_t{0});
  }
  r.backend_id = j.value("backend_id", "");
  return r;
}

/// Digest of everything that determines a greedy completion.
inline std::string cache_key(const CompletionRequest& req) {
  const nlohmann::json j = {req.model_name, req.prompt, req.max_output_tokens, req.stop_sequences};
  return text::sha256_hex(j.dump());
}

inline std::string prompt_digest(std::string_view prompt) { return text::sha256_hex(prompt); }

/// Rough subword count for pre-flight budget checks: each whitespace word
/// costs one token per four bytes, clamped to [1, 4]. Monotone under
/// concatenation; never used to cut text.
inline std::size_t estimate_tokens(std::string_view s) {
  constexpr std::size_t kBytesPerToken = 4;
  constexpr std::size_t kMaxPerWord = 4;
  std::size_t total = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) {
      const std::size_t len = j - i;
      total += std::clamp<std::size_t>((len + kBytesPerToken - 1) / kBytesPerToken, 1, kMaxPerWord);
    }
    i = j;
  }
  return total;
}

/// Output budget: the answer is the annotated input, so 1.5x the body.
inline std::size_t default_max_output_tokens(std::string_view body) {
  const auto est = static_cast<double>(estimate_tokens(body));
  return std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(est * 1.5)));
}

// ---------------------------------------------------------------------------
// Errors

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual bool retriable() const { return false; }
};

/// Network failure or 5xx/429 after all retry attempts were spent.
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
  bool retriable() const override { return true; }
};

/// 4xx response: bad key, unknown model, malformed request.
class ConfigurationError : public BackendError {
 public:
  using BackendError::BackendError;
};

class FixtureMissingError : public BackendError {
 public:
  using BackendError::BackendError;
};

// ---------------------------------------------------------------------------
// Backend contract

/// Side information a test oracle may use; the wire never sees it.
struct PromptContext {
  PromptKind kind = PromptKind::document;
  const Document* doc = nullptr;
  const MarkerRegistry* registry = nullptr;
  std::optional<MentionSpan> target;
  /// Antecedent candidates for QA prompts.
  std::vector<MentionSpan> candidates;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResponse complete(const CompletionRequest& req, const PromptContext* ctx = nullptr) = 0;
  virtual std::string id() const = 0;
};

// ---------------------------------------------------------------------------
// Response cache: append-only JSON lines, one record per key.

class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        entries_.emplace(j.at("key").get<std::string>(), response_from_json(j.at("response")));
      } catch (const std::exception&) {
        // A torn final line from an interrupted run; the request is redone.
        ++skipped_lines_;
      }
    }
  }

  std::optional<CompletionResponse> lookup(const std::string& key) const {
    std::shared_lock lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  /// Appends a record unless the key is already present. Returns whether a
  /// record was written.
  bool store(const std::string& key, const CompletionRequest& req, const CompletionResponse& resp) {
    std::unique_lock lock(mu_);
    if (entries_.contains(key)) return false;
    nlohmann::json rec{{"key", key},
                       {"request",
                        {{"model", req.model_name},
                         {"prompt_sha256", prompt_digest(req.prompt)},
                         {"max_tokens", req.max_output_tokens},
                         {"stop", req.stop_sequences}}},
                       {"response", to_json(resp)},
                       {"timestamp", now_iso8601()}};
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    if (!out) throw BackendError("cannot append to cache file '" + path_.string() + "'");
    out << rec.dump() << "\n";
    out.flush();
    entries_.emplace(key, resp);
    return true;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
  }
  std::size_t skipped_lines() const { return skipped_lines_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  static std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, CompletionResponse> entries_;
  std::size_t skipped_lines_ = 0;
};

// ---------------------------------------------------------------------------
// Replay backend

/// Serves completions recorded as JSON lines of
///   {"prompt_sha256": "<hex>", "completion": "<text>"}
/// A record may carry the raw "prompt" instead of its digest.
class ReplayBackend : public CompletionBackend {
 public:
  explicit ReplayBackend(const std::filesystem::path& fixture_path) : source_(fixture_path.string()) {
    std::ifstream in(fixture_path);
    if (!in) throw ConfigurationError("cannot read replay fixture '" + fixture_path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigurationError(source_ + ":" + std::to_string(line_no) + ": " + e.what());
      }
      std::string digest = j.contains("prompt_sha256") ? j["prompt_sha256"].get<std::string>()
                                                       : prompt_digest(j.at("prompt").get<std::string>());
      add(digest, j.at("completion").get<std::string>(), parse_finish_reason(j.value("finish_reason", "stop")));
    }
  }

  ReplayBackend() : source_("memory") {}

  void add(const std::string& digest, std::string completion, FinishReason reason = FinishReason::stop) {
    fixtures_[digest] = {std::move(completion), reason};
  }
  void add_prompt(std::string_view prompt, std::string completion) { add(prompt_digest(prompt), std::move(completion)); }

  CompletionResponse complete(const CompletionRequest& req, const PromptContext* = nullptr) override {
    auto it = fixtures_.find(prompt_digest(req.prompt));
    if (it == fixtures_.end()) {
      throw FixtureMissingError("no replay fixture for prompt " + prompt_digest(req.prompt).substr(0, 16));
    }
    CompletionResponse r;
    r.text = it->second.first;
    r.finish_reason = it->second.second;
    r.usage = {estimate_tokens(req.prompt), estimate_tokens(r.text)};
    r.backend_id = id();
    return r;
  }

  std::string id() const override { return "replay:" + source_; }
  std::size_t size() const { return fixtures_.size(); }

 private:
  std::string source_;
  std::unordered_map<std::string, std::pair<std::string, FinishReason>> fixtures_;
};

/// Appends one replay record.
inline void append_fixture(const std::filesystem::path& path, std::string_view prompt, std::string_view completion) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigurationError("cannot write fixture file '" + path.string() + "'");
  out << nlohmann::json{{"prompt_sha256", prompt_digest(prompt)}, {"completion", completion}}.dump() << "\n";
}

// ---------------------------------------------------------------------------
// Echo-gold backend

/// Renders `registry` over `doc` with the given labels in place of the empty
/// `#` placeholder: `[surface](#<label>)`.
inline std::string render_labeled(const Document& doc, const MarkerRegistry& registry,
                                  const std::vector<std::string>& labels) {
  std::vector<std::size_t> opens(doc.tokens.size(), 0);
  std::vector<std::vector<std::size_t>> closes(doc.tokens.size());
  for (const auto& e : registry) {
    ++opens[e.span.start];
    closes[e.span.end].push_back(e.ordinal);
  }
  std::string out;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (i > 0) out += doc.tokens[i].sentence_index != doc.tokens[i - 1].sentence_index ? "\n" : " ";
    out.append(opens[i], '[');
    out += doc.tokens[i].surface;
    // Inner (later-opened) markers close first.
    auto& cl = closes[i];
    std::sort(cl.begin(), cl.end(), std::greater<>());
    for (auto ord : cl) out += "](#" + labels[ord] + ")";
  }
  return out;
}

/// Mention classes for echoed mention-detection lists: 0 name, 1 pronoun,
/// 2 nominal.
using MentionClassifier = std::function<int(const Document&, const MentionSpan&)>;

/// Oracle backend: answers every prompt from the document's gold clusters.
/// Document prompts come back as the input body with each `(#)` filled as
/// `(#cluster_<gold id>)`; marked spans outside the gold get fresh ids.
class EchoGoldBackend : public CompletionBackend {
 public:
  explicit EchoGoldBackend(MentionClassifier classifier = {}) : classifier_(std::move(classifier)) {}

  CompletionResponse complete(const CompletionRequest& req, const PromptContext* ctx) override {
    if (ctx == nullptr || ctx->doc == nullptr) throw ConfigurationError("echo-gold backend needs a prompt context");
    const Document& doc = *ctx->doc;
    if (!doc.gold_clusters) throw ConfigurationError(doc.key() + ": echo-gold backend needs gold clusters");
    const Clustering& gold = *doc.gold_clusters;

    CompletionResponse r;
    r.backend_id = id();
    switch (ctx->kind) {
      case PromptKind::document: {
        if (ctx->registry == nullptr) throw ConfigurationError("echo-gold document prompt without a registry");
        std::vector<std::string> labels(ctx->registry->size());
        for (const auto& e : *ctx->registry) {
          const auto c = gold.cluster_of(e.span);
          labels[e.ordinal] = "cluster_" + std::to_string(c ? *c : gold.size() + e.ordinal);
        }
        r.text = render_labeled(doc, *ctx->registry, labels);
        break;
      }
      case PromptKind::qa:
        r.text = answer_qa(doc, gold, *ctx);
        break;
      case PromptKind::mention_detection:
        r.text = list_mentions(doc, gold);
        break;
    }
    r.usage = {estimate_tokens(req.prompt), estimate_tokens(r.text)};
    return r;
  }

  std::string id() const override { return "echo-gold"; }

 private:
  static std::string answer_qa(const Document& doc, const Clustering& gold, const PromptContext& ctx) {
    if (!ctx.target) throw ConfigurationError("echo-gold QA prompt without a target");
    const auto& target = *ctx.target;
    const std::string head = "*" + span_text(doc, target) + "*";
    const auto c = gold.cluster_of(target);
    std::optional<MentionSpan> best;
    if (c) {
      // Nearest gold-coreferent candidate, preferring preceding ones.
      for (const auto& cand : ctx.candidates) {
        if (cand == target) continue;
        const auto& cluster = gold.clusters()[*c];
        if (std::find(cluster.begin(), cluster.end(), cand) == cluster.end()) continue;
        auto rank = [&](const MentionSpan& m) {
          const bool before = document_order(m, target);
          const std::size_t dist = before ? target.start - m.start : m.start - target.start;
          return std::make_pair(before ? 0 : 1, dist);
        };
        if (!best || rank(cand) < rank(*best)) best = cand;
      }
    }
    if (!best) return head + " does not refer to any other mention.";
    return head + " refers to " + span_text(doc, *best) + ".";
  }

  std::string list_mentions(const Document& doc, const Clustering& gold) const {
    std::vector<MentionSpan> ms;
    for (const auto& m : gold.mentions()) ms.push_back(m);
    std::sort(ms.begin(), ms.end(), document_order);
    std::vector<std::string> lists[3];
    for (const auto& m : ms) {
      const int cls = classifier_ ? classifier_(doc, m) : 2;
      lists[std::clamp(cls, 0, 2)].push_back(span_text(doc, m));
    }
    return "Named Entities: " + text::join(lists[0], ", ") + "\nPronouns: " + text::join(lists[1], ", ") +
           "\nNominal Noun Phrases: " + text::join(lists[2], ", ");
  }

  MentionClassifier classifier_;
};

// ---------------------------------------------------------------------------
// HTTP backend

struct HttpConfig {
  std::string base_url = "https://api.openai.com";
  std::string api_key_env = "OPENAI_API_KEY";
  std::size_t max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  std::size_t max_in_flight = 4;
  std::size_t requests_per_minute = 60;
  std::chrono::seconds timeout{120};
};

/// OpenAI-compatible completions client. Cache is consulted before the wire
/// and populated after a successful response.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpConfig cfg, std::shared_ptr<ResponseCache> cache = nullptr)
      : cfg_(std::move(cfg)), cache_(std::move(cache)), slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(
                                                             1, std::min<std::size_t>(cfg_.max_in_flight, 1024)))) {
    split_url(cfg_.base_url, origin_, endpoint_);
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
  }

  CompletionResponse complete(const CompletionRequest& req, const PromptContext* = nullptr) override {
    const std::string key = cache_key(req);
    if (cache_) {
      if (auto hit = cache_->lookup(key)) {
        hit->from_cache = true;
        return *hit;
      }
    }

    const nlohmann::json body{{"model", req.model_name},
                              {"prompt", req.prompt},
                              {"max_tokens", req.max_output_tokens},
                              {"temperature", req.temperature},
                              {"stop", req.stop_sequences.empty() ? nlohmann::json(nullptr)
                                                                  : nlohmann::json(req.stop_sequences)}};
    const std::string payload = body.dump();

    Slot slot(slots_);
    std::string last_error = "no attempt made";
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(1, cfg_.max_attempts); ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(backoff(attempt));
      throttle();
      ++network_calls_;

      httplib::Client client(origin_);
      client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout).count());
      client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout).count());
      httplib::Headers headers;
      if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
      auto res = client.Post(endpoint_, headers, payload, "application/json");

      if (!res) {
        last_error = "transport failure: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status >= 400) {
        throw ConfigurationError("HTTP " + std::to_string(res->status) + " from " + origin_ + endpoint_ + ": " +
                                 res->body.substr(0, 500));
      }
      CompletionResponse out = parse_response(res->body);
      if (cache_) cache_->store(key, req, out);
      return out;
    }
    throw TransportError(origin_ + endpoint_ + ": " + last_error + " after " + std::to_string(cfg_.max_attempts) +
                         " attempts");
  }

  std::string id() const override { return "http:" + origin_ + endpoint_; }
  std::size_t network_calls() const { return network_calls_.load(); }
  const HttpConfig& config() const { return cfg_; }

 private:
  struct Slot {
    explicit Slot(std::counting_semaphore<1024>& s) : sem(s) { sem.acquire(); }
    ~Slot() { sem.release(); }
    std::counting_semaphore<1024>& sem;
  };

  static void split_url(const std::string& url, std::string& origin, std::string& endpoint) {
    const auto scheme = url.find("://");
    const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    endpoint = prefix.ends_with("/v1") ? prefix + "/completions" : prefix + "/v1/completions";
  }

  std::chrono::milliseconds backoff(std::size_t attempt) const {
    const double factor = std::pow(2.0, static_cast<double>(attempt - 1));
    const auto ms = static_cast<long long>(static_cast<double>(cfg_.initial_backoff.count()) * factor);
    return std::min(std::chrono::milliseconds(ms), cfg_.max_backoff);
  }

  void throttle() {
    if (cfg_.requests_per_minute == 0) return;
    const auto interval = std::chrono::microseconds(60'000'000 / cfg_.requests_per_minute);
    std::chrono::steady_clock::time_point wait_until;
    {
      std::lock_guard lock(throttle_mu_);
      const auto now = std::chrono::steady_clock::now();
      wait_until = std::max(now, next_slot_);
      next_slot_ = wait_until + interval;
    }
    std::this_thread::sleep_until(wait_until);
  }

  CompletionResponse parse_response(const std::string& raw) const {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw BackendError(std::string("unparseable completion response: ") + e.what());
    }
    if (!j.contains("choices") || j["choices"].empty()) throw BackendError("completion response without choices");
    const auto& choice = j["choices"][0];
    CompletionResponse r;
    r.text = choice.value("text", "");
    const auto reason = choice.contains("finish_reason") && choice["finish_reason"].is_string()
                            ? choice["finish_reason"].get<std::string>()
                            : std::string("stop");
    r.finish_reason = parse_finish_reason(reason);
    if (j.contains("usage") && j["usage"].is_object()) {
      r.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::size_t{0});
      r.usage.completion_tokens = j["usage"].value("completion_tokens", std::size_t{0});
    }
    r.backend_id = id();
    return r;
  }

  HttpConfig cfg_;
  std::shared_ptr<ResponseCache> cache_;
  std::string origin_;
  std::string endpoint_;
  std::string api_key_;
  std::counting_semaphore<1024> slots_;
  std::mutex throttle_mu_;
  std::chrono::steady_clock::time_point next_slot_{};
  std::atomic<std::size_t> network_calls_{0};
};

}  // namespace promptcoref::llm

#endif  // PROMPTCOREF_LLM_HPP
