#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"

namespace llmda::cli {

/// A stage input is missing; names the command that produces it.
class DependencyError : public std::runtime_error {
 public:
  DependencyError(const std::filesystem::path& missing, const std::string& producer);
  const std::string& producer() const noexcept { return producer_; }

 private:
  std::string producer_;
};

struct RunContext {
  nlohmann::json config;
  PipelineConfig typed;
  std::filesystem::path workdir;
  std::size_t jobs = 1;
  std::ostream* log = nullptr;
};

/// Paths written by a stage, manifest last.
using Artifacts = std::vector<std::filesystem::path>;

inline constexpr const char* kStages[] = {"ingest", "sample-rules", "generate-rules", "adapt-rules",
                                          "reason", "evaluate"};

Artifacts run_stage(const std::string& stage, const RunContext& ctx);
Artifacts run_pipeline(const RunContext& ctx);

/// Config echo used in reports and hashes: the resolved document, compact, keys sorted.
std::string config_digest(const nlohmann::json& config);

}  // namespace llmda::cli
