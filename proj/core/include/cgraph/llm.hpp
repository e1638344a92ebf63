#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace cgraph {

/// Anything that turns a prompt into a completion. Implementations must be
/// safe to call from several threads at once.
class TextOracle {
 public:
  virtual ~TextOracle() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Text -> dense vector. Must be deterministic per input text.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

/// Wraps a callable; handy for tests and ad-hoc oracles.
class FunctionOracle final : public TextOracle {
 public:
  explicit FunctionOracle(std::function<std::string(const std::string&)> fn) : fn_(std::move(fn)) {}
  std::string complete(const std::string& prompt) override { return fn_(prompt); }

 private:
  std::function<std::string(const std::string&)> fn_;
};

inline constexpr const char* kApiKeyEnv = "LLM_API_KEY";

struct OracleConfig {
  std::string endpoint;  // full URL, e.g. http://host:8000/v1/chat/completions
  std::string model;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::size_t max_in_flight = 8;
  std::string api_key;  // never logged

  /// Reads the API key from LLM_API_KEY; other fields keep their values.
  OracleConfig& with_environment_key();
  void validate() const;
};

/// Request/response mapping for one wire schema.
class ChatSchema {
 public:
  virtual ~ChatSchema() = default;
  virtual std::string request_body(const OracleConfig& config, std::string_view prompt) const = 0;
  /// Throws Error(Format) when the body does not carry a completion.
  virtual std::string parse_response(std::string_view body) const = 0;
};

/// `{"model", "temperature", "messages": [{"role": "user", ...}]}` in,
/// `choices[0].message.content` out.
class ChatCompletionsSchema final : public ChatSchema {
 public:
  std::string request_body(const OracleConfig& config, std::string_view prompt) const override;
  std::string parse_response(std::string_view body) const override;
};

/// Caps the number of concurrent holders.
class InFlightGate {
 public:
  explicit InFlightGate(std::size_t limit) : limit_(limit == 0 ? 1 : limit) {}

  void acquire();
  void release();

  class Hold {
   public:
    explicit Hold(InFlightGate& gate) : gate_(gate) { gate_.acquire(); }
    ~Hold() { gate_.release(); }
    Hold(const Hold&) = delete;
    Hold& operator=(const Hold&) = delete;

   private:
    InFlightGate& gate_;
  };

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t limit_;
  std::size_t active_ = 0;
};

/// POSTs one JSON request per completion.
///
/// 429 raises RateLimited, 401/403 AuthFailure, connection failures and 5xx
/// Transport. RateLimited and Transport are retried with exponential backoff
/// up to `max_retries` extra attempts; AuthFailure is raised immediately.
class HttpChatClient final : public TextOracle {
 public:
  explicit HttpChatClient(OracleConfig config, std::shared_ptr<const ChatSchema> schema = nullptr);

  std::string complete(const std::string& prompt) override;

  const OracleConfig& config() const noexcept { return config_; }

 private:
  OracleConfig config_;
  std::shared_ptr<const ChatSchema> schema_;
  InFlightGate gate_;
};

/// `{"model", "input"}` in, `data[0].embedding` out. Same retry policy as
/// HttpChatClient.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(OracleConfig config);
  std::vector<double> embed(std::string_view text) const override;

 private:
  OracleConfig config_;
  mutable InFlightGate gate_;
};

/// Shared POST-with-retry used by both HTTP clients. Exposed for tests.
std::string post_json_with_retry(const OracleConfig& config, const std::string& body);

}  // namespace cgraph
