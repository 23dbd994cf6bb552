#pragma once

#include <atomic>
#include <chrono>
#include <string>

#include "llmda/llm.hpp"
#include "llmda/selector.hpp"

namespace llmda {

struct HttpEndpoint {
  /// Full URL, e.g. "https://api.openai.com/v1/chat/completions".
  std::string url;
  /// Environment variable holding the bearer token. Empty sends no token.
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::seconds timeout{60};
};

/// OpenAI-compatible chat completions client.
class LiveChatBackend final : public LlmBackend {
 public:
  explicit LiveChatBackend(HttpEndpoint endpoint);
  ChatResponse complete(const ChatRequest& request, std::uint64_t seq) override;
  std::string id() const override { return "live"; }

 private:
  HttpEndpoint endpoint_;
  std::string origin_;
  std::string path_;
  std::string api_key_;
};

/// OpenAI-compatible embeddings client. The dimension is learned from the
/// first response.
class ExternalEmbeddingProvider final : public EmbeddingProvider {
 public:
  ExternalEmbeddingProvider(HttpEndpoint endpoint, std::string model);
  EmbeddingVector embed(const std::string& text) override;
  std::size_t dimension() const override { return dimension_.load(); }
  std::string id() const override { return "external:" + model_; }

 private:
  HttpEndpoint endpoint_;
  std::string model_;
  std::string origin_;
  std::string path_;
  std::string api_key_;
  std::atomic<std::size_t> dimension_{0};
};

/// Splits "scheme://host[:port]/path" into origin and path ("/" when absent).
std::pair<std::string, std::string> split_url(const std::string& url);

}  // namespace llmda
