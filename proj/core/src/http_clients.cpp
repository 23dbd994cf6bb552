#include "llmda/http_clients.hpp"

#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

namespace llmda {

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

namespace {

std::string read_key(const std::string& env) {
  if (env.empty()) return {};
  const char* v = std::getenv(env.c_str());
  return v ? std::string(v) : std::string();
}

nlohmann::json post_json(const std::string& origin, const std::string& path, const std::string& key,
                         std::chrono::seconds timeout, const nlohmann::json& body) {
  httplib::Client client(origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw BackendError("request to " + origin + path + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw BackendError("request to " + origin + path + " returned HTTP " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed response body: ") + e.what());
  }
}

}  // namespace

LiveChatBackend::LiveChatBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  std::tie(origin_, path_) = split_url(endpoint_.url);
  api_key_ = read_key(endpoint_.api_key_env);
}

ChatResponse LiveChatBackend::complete(const ChatRequest& request, std::uint64_t) {
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
  messages.push_back({{"role", "user"}, {"content", request.user}});
  const nlohmann::json body = {{"model", request.model},
                               {"messages", std::move(messages)},
                               {"temperature", request.temperature},
                               {"max_tokens", request.max_tokens}};
  const auto j = post_json(origin_, path_, api_key_, endpoint_.timeout, body);
  try {
    const auto& choice = j.at("choices").at(0);
    ChatResponse out;
    out.text = choice.at("message").at("content").get<std::string>();
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      out.finish_reason = choice["finish_reason"].get<std::string>();
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("unexpected completion payload: ") + e.what());
  }
}

ExternalEmbeddingProvider::ExternalEmbeddingProvider(HttpEndpoint endpoint, std::string model)
    : endpoint_(std::move(endpoint)), model_(std::move(model)) {
  std::tie(origin_, path_) = split_url(endpoint_.url);
  api_key_ = read_key(endpoint_.api_key_env);
}

EmbeddingVector ExternalEmbeddingProvider::embed(const std::string& text) {
  const nlohmann::json body = {{"model", model_}, {"input", text}};
  const auto j = post_json(origin_, path_, api_key_, endpoint_.timeout, body);
  EmbeddingVector v;
  try {
    v = j.at("data").at(0).at("embedding").get<EmbeddingVector>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("unexpected embedding payload: ") + e.what());
  }
  if (v.empty()) throw BackendError("empty embedding");
  std::size_t expected = 0;
  if (!dimension_.compare_exchange_strong(expected, v.size()) && expected != v.size()) {
    throw ValidationError("embedding dimension changed from " + std::to_string(expected) + " to " +
                          std::to_string(v.size()));
  }
  return v;
}

}  // namespace llmda
