#pragma once

#include <span>
#include <string>
#include <vector>

#include "llmda/llm.hpp"
#include "llmda/quality.hpp"
#include "llmda/rule.hpp"
#include "llmda/rule_parser.hpp"
#include "llmda/selector.hpp"
#include "llmda/tkg.hpp"
#include "llmda/walk.hpp"

namespace llmda {

struct GenerationConfig {
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 1024;
  /// Rules listed per prompt section; the lowest-support rules are dropped first.
  std::size_t max_prompt_rules = 50;
  /// Reject body relations outside the head's top-k candidates.
  bool restrict_to_candidates = true;
};

struct HeadFailure {
  RelationId head{};
  std::string error;
};

struct GenerationReport {
  std::size_t calls = 0;
  std::size_t accepted = 0;
  std::vector<RejectedLine> rejected;
  std::vector<HeadFailure> failures;
};

/// For each head: prompt with its sampled rules and top-k candidates, parse the
/// answer and add accepted rules for that head. Sampled rules are never removed;
/// a head whose request fails after retries keeps only its sampled rules.
RuleSet generate_rules(LlmSession& session, const RelationCatalog& catalog,
                       std::span<const RelationId> heads, const RuleSet& sampled,
                       const RelationSelector& selector, const GenerationConfig& config,
                       GenerationReport* report = nullptr);

struct AdaptationConfig {
  double theta = 0.01;
  std::size_t iterations = 5;
  WalkConfig walk;
  GenerationConfig generation;
  ConfidenceOptions confidence;
  std::size_t jobs = 1;
};

struct IterationStats {
  std::size_t rules = 0;
  std::size_t low = 0;
  std::size_t prompted_heads = 0;
  std::size_t replaced_heads = 0;
  double mean_confidence = 0.0;
};

struct AdaptationResult {
  /// S_d, scored once more on the scoring KG after the last iteration.
  std::vector<ScoredRule> adapted;
  std::vector<IterationStats> iterations;
  std::vector<RejectedLine> rejected;
  std::vector<HeadFailure> failures;
};

/// Iteratively rescores the working set on `scoring_kg`, partitions at theta,
/// and asks the backend to replace each head's low-confidence rules using rules
/// freshly extracted from `current_kg`. Accepted replacements substitute the
/// head's low-confidence rules; high-confidence rules pass through unchanged; a
/// head with no accepted replacement keeps its originals.
AdaptationResult dynamic_adapt(LlmSession& session, const RuleSet& generated,
                               const TemporalKG& scoring_kg, const TemporalKG& current_kg,
                               const RelationSelector& selector, const AdaptationConfig& config);

}  // namespace llmda
