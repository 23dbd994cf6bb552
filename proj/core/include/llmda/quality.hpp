#pragma once

#include <optional>
#include <span>
#include <vector>

#include "llmda/rule.hpp"
#include "llmda/tkg.hpp"

namespace llmda {

/// One body grounding: substitution for X, Z1, ..., Y and the body timestamps.
struct Grounding {
  std::vector<EntityId> substitution;
  std::vector<Timestamp> times;
  Timestamp latest_body_time = 0;
};

struct GroundingOptions {
  /// Maximum bindings expanded from one bound variable; most recent first.
  std::size_t fanout_cap = 1000;
  bool strict_within_body = false;
};

struct GroundingResult {
  std::vector<Grounding> groundings;
  bool truncated = false;
};

/// All distinct (X, Y, t_1..t_k) body groundings, sorted by (X, Y, times).
/// Throws ResolutionError if a rule relation is not in the catalog.
GroundingResult ground_body(const Rule& rule, const TemporalKG& kg,
                            const GroundingOptions& options = {});

struct ConfidenceOptions {
  GroundingOptions grounding;
  /// When set, a head edge only counts if t_o < t_l <= t_o + horizon.
  std::optional<Timestamp> horizon;
};

/// body_support = distinct (X, Y) body pairs; rule_support = those pairs with a
/// head edge head(X, Y, t_l) after some grounding's latest body time.
ScoredRule confidence(const Rule& rule, const TemporalKG& kg, const ConfidenceOptions& options = {});

std::vector<ScoredRule> score_rules(std::span<const Rule> rules, const TemporalKG& kg,
                                    const ConfidenceOptions& options = {}, std::size_t jobs = 1);

struct RulePartition {
  std::vector<ScoredRule> low;
  std::vector<ScoredRule> high;
};

/// low = {c < theta}, high = the rest, both in input order. Throws ValidationError
/// when theta is outside [0, 1].
RulePartition partition_by_threshold(std::span<const ScoredRule> rules, double theta);

}  // namespace llmda
