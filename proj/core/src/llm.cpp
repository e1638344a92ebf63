#include "cgraph/llm.hpp"

#include <cstdlib>
#include <thread>

#include "cgraph/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace cgraph {

using json = nlohmann::json;

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "endpoint must be an absolute http(s) URL");
  }
  const auto scheme = endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::InvalidArgument, "unsupported endpoint scheme '" + scheme + "'");
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace

OracleConfig& OracleConfig::with_environment_key() {
  if (const char* key = std::getenv(kApiKeyEnv)) api_key = key;
  return *this;
}

void OracleConfig::validate() const {
  if (temperature < 0.0) throw Error(ErrorCode::InvalidArgument, "temperature must be >= 0");
  if (max_retries < 0) throw Error(ErrorCode::InvalidArgument, "max_retries must be >= 0");
  if (endpoint.empty()) throw Error(ErrorCode::InvalidArgument, "endpoint is required");
  split_url(endpoint);
}

std::string ChatCompletionsSchema::request_body(const OracleConfig& config, std::string_view prompt) const {
  json body = {
      {"model", config.model},
      {"temperature", config.temperature},
      {"messages", json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
  };
  return body.dump();
}

std::string ChatCompletionsSchema::parse_response(std::string_view body) const {
  try {
    const auto root = json::parse(body);
    return root.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("unexpected chat response: ") + e.what());
  }
}

void InFlightGate::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [this] { return active_ < limit_; });
  ++active_;
}

void InFlightGate::release() {
  {
    std::lock_guard lock(mutex_);
    --active_;
  }
  cv_.notify_one();
}

std::string post_json_with_retry(const OracleConfig& config, const std::string& body) {
  const auto url = split_url(config.endpoint);
  httplib::Client client(url.origin);
  const auto timeout_s = static_cast<time_t>(config.timeout.count() / 1000);
  const auto timeout_us = static_cast<time_t>((config.timeout.count() % 1000) * 1000);
  client.set_connection_timeout(timeout_s, timeout_us);
  client.set_read_timeout(timeout_s, timeout_us);
  client.set_write_timeout(timeout_s, timeout_us);

  httplib::Headers headers;
  if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

  auto backoff = config.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    ErrorCode failure = ErrorCode::Transport;
    std::string message;
    bool retryable = true;

    const auto result = client.Post(url.path, headers, body, "application/json");
    if (!result) {
      message = "request to " + url.origin + url.path + " failed: " + httplib::to_string(result.error());
    } else if (result->status >= 200 && result->status < 300) {
      return result->body;
    } else if (result->status == 429) {
      failure = ErrorCode::RateLimited;
      message = "rate limited by " + url.origin;
    } else if (result->status == 401 || result->status == 403) {
      failure = ErrorCode::AuthFailure;
      message = "authentication rejected by " + url.origin + " (HTTP " + std::to_string(result->status) + ")";
      retryable = false;
    } else {
      message = "HTTP " + std::to_string(result->status) + " from " + url.origin + url.path;
      retryable = result->status >= 500 || result->status == 408;
    }

    if (!retryable || attempt >= config.max_retries) throw Error(failure, message);
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

HttpChatClient::HttpChatClient(OracleConfig config, std::shared_ptr<const ChatSchema> schema)
    : config_(std::move(config)),
      schema_(schema ? std::move(schema) : std::make_shared<ChatCompletionsSchema>()),
      gate_(config_.max_in_flight) {
  config_.validate();
}

std::string HttpChatClient::complete(const std::string& prompt) {
  InFlightGate::Hold hold(gate_);
  return schema_->parse_response(post_json_with_retry(config_, schema_->request_body(config_, prompt)));
}

HttpEmbedder::HttpEmbedder(OracleConfig config) : config_(std::move(config)), gate_(config_.max_in_flight) {
  config_.validate();
}

std::vector<double> HttpEmbedder::embed(std::string_view text) const {
  InFlightGate::Hold hold(gate_);
  const json request = {{"model", config_.model}, {"input", std::string(text)}};
  const auto body = post_json_with_retry(config_, request.dump());
  try {
    return json::parse(body).at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("unexpected embedding response: ") + e.what());
  }
}

}  // namespace cgraph
