#include "llmda/walk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "llmda/parallel.hpp"
#include "llmda/random.hpp"

namespace llmda {

void WalkConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("walk lambda must be > 0");
  if (max_body_len == 0) throw ValidationError("max_body_len must be >= 1");
}

bool is_valid_path(const TemporalPath& path, bool strict_within_body) {
  const auto& nodes = path.nodes;
  const auto& body = path.body;
  if (body.empty() || nodes.size() != body.size() + 1) return false;
  if (nodes.front() != path.anchor.subject || nodes.back() != path.anchor.object) return false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const Edge& e = body[i];
    const bool forward = e.subject == nodes[i] && e.object == nodes[i + 1];
    const bool backward = e.subject == nodes[i + 1] && e.object == nodes[i];
    if (!forward && !backward) return false;
    if (i > 0) {
      const Timestamp prev = body[i - 1].t;
      if (strict_within_body ? !(prev < e.t) : !(prev <= e.t)) return false;
    }
  }
  return body.back().t < path.anchor.t;
}

std::vector<double> transition_distribution(std::span<const Timestamp> candidate_times,
                                            Timestamp reference, double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("decay rate must be > 0");
  if (candidate_times.empty()) return {};
  Timestamp latest = candidate_times.front();
  for (Timestamp t : candidate_times) {
    if (t > reference) throw ValidationError("candidate edge is later than the reference time");
    latest = std::max(latest, t);
  }
  // Shifting by the latest candidate cancels in the normalization and keeps
  // the largest weight at exactly 1.
  std::vector<double> w;
  w.reserve(candidate_times.size());
  for (Timestamp t : candidate_times) {
    w.push_back(std::exp(-lambda * static_cast<double>(latest - t)));
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

namespace {

struct Step {
  const TemporalKG& kg;
  const WalkConfig& config;

  /// Admissible edges out of `node`. `bound` is the latest allowed time and
  /// `strict` excludes it; `prev` (if any) is the edge just walked.
  std::vector<std::uint32_t> candidates(EntityId node, Timestamp bound, bool strict,
                                        const Edge* prev, const EntityId* target) const {
    const auto timeline = kg.subject_timeline(node);
    const auto edges = kg.edges();
    auto end = strict ? std::lower_bound(timeline.begin(), timeline.end(), bound,
                                         [&](std::uint32_t p, Timestamp t) { return edges[p].t < t; })
                      : std::upper_bound(timeline.begin(), timeline.end(), bound,
                                         [&](Timestamp t, std::uint32_t p) { return t < edges[p].t; });
    std::vector<std::uint32_t> out;
    for (auto it = timeline.begin(); it != end; ++it) {
      const Edge& e = edges[*it];
      if (target && e.object != *target) continue;
      if (prev && e.object == prev->subject && e.t == prev->t &&
          e.relation == inverse_of(prev->relation)) {
        continue;
      }
      out.push_back(*it);
    }
    return out;
  }
};

std::optional<TemporalPath> walk_once(const TemporalKG& kg, const WalkConfig& config,
                                      std::span<const std::uint32_t> anchors, std::size_t length,
                                      Rng& rng) {
  const Step step{kg, config};
  const Edge& anchor = kg.edge(anchors[uniform_index(rng, anchors.size())]);
  std::vector<Edge> walked;
  walked.reserve(length);
  EntityId node = anchor.object;
  Timestamp reference = anchor.t;
  std::vector<Timestamp> times;
  for (std::size_t s = 0; s < length; ++s) {
    const bool first = s == 0;
    const bool last = s + 1 == length;
    const bool strict = first || config.strict_within_body;
    const auto cands = step.candidates(node, reference, strict, first ? nullptr : &walked.back(),
                                       last ? &anchor.subject : nullptr);
    times.clear();
    for (auto p : cands) times.push_back(kg.edge(p).t);
    const auto probs = transition_distribution(times, reference, config.lambda);
    if (probs.empty()) return std::nullopt;
    const Edge& chosen = kg.edge(cands[sample_categorical(rng, probs)]);
    walked.push_back(chosen);
    node = chosen.object;
    reference = chosen.t;
  }
  TemporalPath path;
  path.anchor = anchor;
  path.nodes.reserve(length + 1);
  path.nodes.push_back(anchor.subject);
  for (auto it = walked.rbegin(); it != walked.rend(); ++it) {
    path.body.push_back(*it);
    path.nodes.push_back(it->subject);
  }
  return path;
}

}  // namespace

SampleResult sample_closed_paths(const TemporalKG& kg, RelationId head, const WalkConfig& config) {
  config.validate();
  SampleResult result;
  const auto anchors = kg.by_relation(head);
  if (anchors.empty()) {
    result.warnings.push_back("head relation " + std::to_string(value_of(head)) +
                              " has no edges; nothing to sample");
    return result;
  }
  for (std::size_t length = 1; length <= config.max_body_len; ++length) {
    Rng rng(derive_seed(config.seed, value_of(head), length));
    for (std::size_t w = 0; w < config.walks_per_relation; ++w) {
      auto path = walk_once(kg, config, anchors, length, rng);
      if (!path) continue;
      if (!is_valid_path(*path, config.strict_within_body)) {
        throw std::logic_error("walk produced a path violating the temporal chain constraints");
      }
      result.paths.push_back(std::move(*path));
    }
  }
  return result;
}

Rule lift_to_rule(const TemporalPath& path) {
  Rule rule;
  rule.head = path.anchor.relation;
  rule.body.reserve(path.body.size());
  for (std::size_t i = 0; i < path.body.size(); ++i) {
    const Edge& e = path.body[i];
    const bool forward = e.subject == path.nodes[i] && e.object == path.nodes[i + 1];
    rule.body.push_back(forward ? e.relation : inverse_of(e.relation));
  }
  return rule;
}

RuleSet extract_rules(const TemporalKG& kg, std::span<const RelationId> heads,
                      const WalkConfig& config, std::size_t jobs) {
  config.validate();
  std::vector<RelationId> unique_heads(heads.begin(), heads.end());
  std::sort(unique_heads.begin(), unique_heads.end());
  unique_heads.erase(std::unique(unique_heads.begin(), unique_heads.end()), unique_heads.end());
  heads = unique_heads;
  using GroundingKey = std::pair<std::vector<EntityId>, std::vector<Timestamp>>;
  std::vector<std::map<Rule, std::set<GroundingKey>>> per_head(heads.size());
  parallel_for(heads.size(), jobs, [&](std::size_t i) {
    auto sampled = sample_closed_paths(kg, heads[i], config);
    auto& bucket = per_head[i];
    for (const TemporalPath& p : sampled.paths) {
      GroundingKey key{p.nodes, {}};
      for (const Edge& e : p.body) key.second.push_back(e.t);
      bucket[lift_to_rule(p)].insert(std::move(key));
    }
  });
  RuleSet rules;
  for (auto& bucket : per_head) {
    for (auto& [rule, groundings] : bucket) rules[rule] += groundings.size();
  }
  return rules;
}

}  // namespace llmda
