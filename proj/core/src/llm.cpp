#include "llmda/llm.hpp"

#include <fstream>
#include <thread>

#include "json.hpp"
#include "llmda/parallel.hpp"
#include "llmda/prompts.hpp"

namespace llmda {

std::uint64_t Transcript::reserve(std::size_t n) {
  std::lock_guard lock(mutex_);
  const auto first = next_seq_;
  next_seq_ += n;
  return first;
}

void Transcript::record(ChatExchange exchange) {
  std::lock_guard lock(mutex_);
  if (records_.contains(exchange.seq)) {
    throw std::logic_error("sequence number " + std::to_string(exchange.seq) + " recorded twice");
  }
  next_seq_ = std::max(next_seq_, exchange.seq + 1);
  records_.emplace(exchange.seq, std::move(exchange));
}

std::vector<ChatExchange> Transcript::exchanges() const {
  std::lock_guard lock(mutex_);
  std::vector<ChatExchange> out;
  out.reserve(records_.size());
  for (const auto& [seq, ex] : records_) out.push_back(ex);
  return out;
}

std::size_t Transcript::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

void Transcript::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const ChatExchange& ex : exchanges()) {
    nlohmann::ordered_json j;
    j["seq"] = ex.seq;
    j["request"] = {{"model", ex.request.model},
                    {"system", ex.request.system},
                    {"user", ex.request.user},
                    {"temperature", ex.request.temperature}};
    j["response"] = {{"text", ex.response.text}};
    out << j.dump() << '\n';
  }
}

std::vector<ChatExchange> Transcript::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open transcript " + path.string());
  std::vector<ChatExchange> t;
  std::string line;
  std::size_t lineno = 0;
  std::uint64_t last = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ChatExchange ex;
      ex.seq = j.at("seq").get<std::uint64_t>();
      const auto& rq = j.at("request");
      ex.request.model = rq.at("model").get<std::string>();
      ex.request.system = rq.value("system", "");
      ex.request.user = rq.at("user").get<std::string>();
      ex.request.temperature = rq.value("temperature", 0.0);
      ex.response.text = j.at("response").at("text").get<std::string>();
      if (any && ex.seq <= last) {
        throw ParseError(path.string(), lineno, "sequence numbers must be strictly increasing");
      }
      last = ex.seq;
      any = true;
      t.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
  return t;
}

ReplayBackend::ReplayBackend(std::vector<ChatExchange> recorded)
    : recorded_(std::move(recorded)), consumed_(recorded_.size(), false) {
  for (std::size_t i = 0; i < recorded_.size(); ++i) by_seq_.emplace(recorded_[i].seq, i);
}

ChatResponse ReplayBackend::complete(const ChatRequest& request, std::uint64_t seq) {
  std::lock_guard lock(mutex_);
  if (auto it = by_seq_.find(seq); it != by_seq_.end()) {
    const std::size_t i = it->second;
    if (!consumed_[i] && recorded_[i].request.same_as(request)) {
      consumed_[i] = true;
      return recorded_[i].response;
    }
  }
  for (std::size_t i = 0; i < recorded_.size(); ++i) {
    if (!consumed_[i] && recorded_[i].request.same_as(request)) {
      consumed_[i] = true;
      return recorded_[i].response;
    }
  }
  throw ReplayDivergenceError("replay transcript has no unconsumed exchange matching request #" +
                              std::to_string(seq) + " (model " + request.model + ")");
}

std::size_t ReplayBackend::remaining() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (bool c : consumed_) n += c ? 0 : 1;
  return n;
}

ScriptedBackend::ScriptedBackend(Responder responder) : responder_(std::move(responder)) {}

std::shared_ptr<ScriptedBackend> ScriptedBackend::candidate_echo() {
  return std::make_shared<ScriptedBackend>(
      [](const ChatRequest& rq) -> std::optional<std::string> { return candidate_echo_response(rq.user); });
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open script " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  struct Entry {
    std::string contains;
    std::optional<std::string> text;
  };
  std::vector<Entry> entries;
  for (const auto& e : j.value("responses", nlohmann::json::array())) {
    Entry entry{e.at("contains").get<std::string>(), std::nullopt};
    if (!e.value("error", false)) entry.text = e.at("text").get<std::string>();
    entries.push_back(std::move(entry));
  }
  const std::string fallback = j.value("default", std::string("@candidates"));
  auto render = [](const std::string& text, const ChatRequest& rq) {
    return text == "@candidates" ? candidate_echo_response(rq.user) : text;
  };
  return std::make_shared<ScriptedBackend>(
      [entries, fallback, render](const ChatRequest& rq) -> std::optional<std::string> {
        for (const Entry& e : entries) {
          if (rq.user.find(e.contains) == std::string::npos) continue;
          if (!e.text) return std::nullopt;
          return render(*e.text, rq);
        }
        return render(fallback, rq);
      });
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request, std::uint64_t) {
  {
    std::lock_guard lock(mutex_);
    ++calls_;
  }
  auto text = responder_(request);
  if (!text) throw BackendError("scripted backend failure");
  return ChatResponse{std::move(*text), "stop"};
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

LlmSession::LlmSession(std::shared_ptr<LlmBackend> backend, std::shared_ptr<Transcript> transcript,
                       SessionOptions options)
    : backend_(std::move(backend)),
      transcript_(transcript ? std::move(transcript) : std::make_shared<Transcript>()),
      options_(options) {}

CompletionOutcome LlmSession::run(const ChatRequest& request, std::uint64_t seq) {
  CompletionOutcome outcome;
  auto delay = options_.backoff;
  for (std::size_t attempt = 0; attempt <= options_.max_retries; ++attempt) {
    ++outcome.attempts;
    try {
      outcome.response = backend_->complete(request, seq);
      if (options_.record) transcript_->record({seq, request, *outcome.response});
      return outcome;
    } catch (const BackendError& e) {
      outcome.error = e.what();
    }
    if (attempt < options_.max_retries && delay.count() > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  return outcome;
}

std::vector<CompletionOutcome> LlmSession::complete_batch(const std::vector<ChatRequest>& requests) {
  const std::uint64_t first = transcript_->reserve(requests.size());
  std::vector<CompletionOutcome> outcomes(requests.size());
  parallel_for(requests.size(), options_.jobs,
               [&](std::size_t i) { outcomes[i] = run(requests[i], first + i); });
  return outcomes;
}

CompletionOutcome LlmSession::complete(const ChatRequest& request) {
  return complete_batch({request}).front();
}

}  // namespace llmda
