#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "llmda/types.hpp"

namespace llmda {

struct ChatRequest {
  std::string model;
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_tokens = 1024;

  /// Identity as recorded in transcripts (max_tokens is not recorded).
  bool same_as(const ChatRequest& other) const {
    return model == other.model && system == other.system && user == other.user &&
           temperature == other.temperature;
  }
};

struct ChatResponse {
  std::string text;
  std::string finish_reason = "stop";
};

struct ChatExchange {
  std::uint64_t seq = 0;
  ChatRequest request;
  ChatResponse response;
};

/// A failed completion that may succeed on retry.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Replay saw a request that is not in the recorded transcript. Never retried.
class ReplayDivergenceError : public Error {
 public:
  using Error::Error;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  /// `seq` is the sequence number the exchange will be recorded under.
  virtual ChatResponse complete(const ChatRequest& request, std::uint64_t seq) = 0;
  virtual std::string id() const = 0;
};

/// Ordered, sequence-numbered record of exchanges. Thread-safe.
class Transcript {
 public:
  Transcript() = default;

  /// Reserves `n` consecutive sequence numbers and returns the first.
  std::uint64_t reserve(std::size_t n);
  void record(ChatExchange exchange);
  std::vector<ChatExchange> exchanges() const;
  std::size_t size() const;

  void write(const std::filesystem::path& path) const;
  /// Exchanges of a transcript file, in file order.
  static std::vector<ChatExchange> read(const std::filesystem::path& path);

 private:
  mutable std::mutex mutex_;
  std::uint64_t next_seq_ = 0;
  std::map<std::uint64_t, ChatExchange> records_;
};

/// Answers from a recorded transcript. A request is matched to the exchange
/// recorded under the same sequence number when the requests agree, otherwise
/// to the earliest unconsumed exchange with an identical request.
class ReplayBackend final : public LlmBackend {
 public:
  explicit ReplayBackend(std::vector<ChatExchange> recorded);
  ChatResponse complete(const ChatRequest& request, std::uint64_t seq) override;
  std::string id() const override { return "replay"; }
  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ChatExchange> recorded_;
  std::vector<bool> consumed_;
  std::map<std::uint64_t, std::size_t> by_seq_;
};

/// Deterministic in-process backend driven by a responder function.
/// A responder returning nullopt simulates a backend failure.
class ScriptedBackend final : public LlmBackend {
 public:
  using Responder = std::function<std::optional<std::string>(const ChatRequest&)>;

  explicit ScriptedBackend(Responder responder);
  /// Script file: {"responses": [{"contains": s, "text": t} | {"contains": s, "error": true}],
  /// "default": t}. The text "@candidates" answers with rules built from the
  /// prompt's candidate relations.
  static std::shared_ptr<ScriptedBackend> from_script(const std::filesystem::path& path);
  /// Answers every request with candidate-derived rules.
  static std::shared_ptr<ScriptedBackend> candidate_echo();

  ChatResponse complete(const ChatRequest& request, std::uint64_t seq) override;
  std::string id() const override { return "scripted"; }
  std::size_t calls() const;

 private:
  Responder responder_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

struct SessionOptions {
  std::size_t max_retries = 3;
  std::chrono::milliseconds backoff{500};
  std::size_t jobs = 1;
  /// Record successful exchanges in the session transcript.
  bool record = true;
};

struct CompletionOutcome {
  std::optional<ChatResponse> response;
  std::string error;
  std::size_t attempts = 0;
};

/// Backend + transcript + retry policy. Batches reserve their sequence numbers
/// up front in request order, so transcripts do not depend on `jobs`.
class LlmSession {
 public:
  LlmSession(std::shared_ptr<LlmBackend> backend, std::shared_ptr<Transcript> transcript,
             SessionOptions options = {});

  std::vector<CompletionOutcome> complete_batch(const std::vector<ChatRequest>& requests);
  CompletionOutcome complete(const ChatRequest& request);

  const Transcript& transcript() const { return *transcript_; }
  std::shared_ptr<Transcript> shared_transcript() const { return transcript_; }
  const LlmBackend& backend() const { return *backend_; }

 private:
  CompletionOutcome run(const ChatRequest& request, std::uint64_t seq);

  std::shared_ptr<LlmBackend> backend_;
  std::shared_ptr<Transcript> transcript_;
  SessionOptions options_;
};

}  // namespace llmda
