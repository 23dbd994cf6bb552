#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "llmda/orchestrator.hpp"
#include "llmda/reasoner.hpp"
#include "llmda/walk.hpp"

namespace llmda::cli {

/// One or more field-level configuration problems.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class Backend { None, Scripted, Replay, Live };
enum class ScorerKind { Baseline, Import, None };
enum class RescoreSource { Current, Historical, HistoricalCurrent };

struct DatasetConfig {
  std::filesystem::path historical;
  std::filesystem::path current;
  std::filesystem::path future;
  std::optional<std::filesystem::path> entity2id;
  std::optional<std::filesystem::path> relation2id;
};

struct SelectorSettings {
  std::size_t k = 20;
  std::string provider = "fallback-trigram";
  std::string endpoint;
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  std::string cache;
};

struct LlmSettings {
  Backend backend = Backend::None;
  std::string endpoint;
  std::string api_key_env;
  int timeout_s = 60;
  std::size_t max_retries = 3;
  int backoff_ms = 500;
  std::string script;
  std::string transcript;
};

struct EvalSettings {
  std::size_t segments = 1;
  Timestamp horizon_delta_t = 0;
  std::size_t horizon_k = 0;
};

/// Typed view of the configuration document.
struct PipelineConfig {
  DatasetConfig dataset;
  std::uint64_t seed = 0;
  WalkConfig walk;
  ConfidenceOptions confidence;
  SelectorSettings selector;
  LlmSettings llm;
  GenerationConfig generation;
  double theta = 0.01;
  std::size_t iterations = 5;
  RescoreSource rescore = RescoreSource::Current;
  FusionConfig fusion;
  ScorerKind scorer = ScorerKind::Baseline;
  std::string graph_scores;
  std::size_t top_n = 100;
  EvalSettings eval;
};

/// Every key with its default value.
nlohmann::json default_config();

/// Overlays `overlay` onto `base`; keys absent from `base` are errors.
void merge_config(nlohmann::json& base, const nlohmann::json& overlay, std::vector<std::string>& problems,
                  const std::string& prefix = "");

/// Applies "a.b=value". The value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Validates every field and returns the typed view. Throws ConfigError listing all problems.
PipelineConfig parse_config(const nlohmann::json& config);

/// Loads a config file over the defaults and applies overrides.
nlohmann::json resolve_config(const std::optional<std::filesystem::path>& file,
                              const std::vector<std::string>& overrides);

std::string backend_name(Backend b);

}  // namespace llmda::cli
