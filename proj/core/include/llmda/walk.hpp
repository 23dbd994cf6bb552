#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "llmda/rule.hpp"
#include "llmda/tkg.hpp"

namespace llmda {

struct WalkConfig {
  double lambda = 0.1;
  std::size_t max_body_len = 3;
  /// Walks attempted per head relation and per target body length.
  std::size_t walks_per_relation = 200;
  std::uint64_t seed = 0;
  /// Require T_i < T_{i+1} inside the body instead of T_i <= T_{i+1}.
  bool strict_within_body = false;

  /// Throws ValidationError when lambda <= 0 or max_body_len == 0.
  void validate() const;
};

/// A sampled closed path. `nodes` runs X = anchor.subject ... Y = anchor.object;
/// body[i] is the KG edge connecting nodes[i] and nodes[i+1], in either orientation.
struct TemporalPath {
  Edge anchor;
  std::vector<EntityId> nodes;
  std::vector<Edge> body;
};

/// Checks chain shape, closure and T_1 <= ... <= T_{l-1} < t_l.
bool is_valid_path(const TemporalPath& path, bool strict_within_body = false);

/// Recency-weighted next-edge distribution: w(t) = exp(-lambda * (reference - t)),
/// normalized over the candidates. Empty input yields an empty vector (dead end).
/// Throws ValidationError if lambda <= 0 or a candidate is later than `reference`.
std::vector<double> transition_distribution(std::span<const Timestamp> candidate_times,
                                            Timestamp reference, double lambda);

struct SampleResult {
  std::vector<TemporalPath> paths;
  std::vector<std::string> warnings;
};

/// Constrained backward-in-time walks for one head relation.
///
/// Each walk picks a uniform anchor edge (X, head, Y, t_l) and walks from Y
/// back in time to X: the first step only sees edges with t < t_l, later steps
/// edges no later than the previous one, and the last step only edges that
/// land on X. Walks that dead-end are discarded. Every (length, walk) pair
/// draws from a stream derived from (seed, head, length), so the first W walks
/// are the same for any walks_per_relation >= W.
SampleResult sample_closed_paths(const TemporalKG& kg, RelationId head, const WalkConfig& config);

/// Replaces entities by variables; edges that point against the chain are
/// read through their inverse relation.
Rule lift_to_rule(const TemporalPath& path);

/// Union of lifted rules over `heads`, support = distinct sampled groundings.
RuleSet extract_rules(const TemporalKG& kg, std::span<const RelationId> heads,
                      const WalkConfig& config, std::size_t jobs = 1);

}  // namespace llmda
