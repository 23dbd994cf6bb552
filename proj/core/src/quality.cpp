#include "llmda/quality.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <unordered_map>

#include "llmda/parallel.hpp"

namespace llmda {

namespace {

void check_relations(const Rule& rule, const TemporalKG& kg) {
  const auto& rels = kg.relations();
  if (!rels.contains(rule.head)) {
    throw ResolutionError("rule head relation " + std::to_string(value_of(rule.head)) +
                          " is not in the catalog");
  }
  for (RelationId r : rule.body) {
    if (!rels.contains(r)) {
      throw ResolutionError("rule body relation " + std::to_string(value_of(r)) +
                            " is not in the catalog");
    }
  }
}

/// Depth-first enumeration of body chains. `visit(nodes, times)` receives the
/// substitution (X, Z.., Y) and the body timestamps. Returns true on truncation.
template <typename Visit>
bool enumerate_body(const Rule& rule, const TemporalKG& kg, const GroundingOptions& options,
                    Visit&& visit) {
  const std::size_t k = rule.body.size();
  if (k == 0) return false;
  const auto edges = kg.edges();
  std::vector<EntityId> nodes(k + 1);
  std::vector<Timestamp> times(k);
  bool truncated = false;

  auto extend = [&](auto&& self, std::size_t depth) -> void {
    if (depth == k) {
      visit(nodes, times);
      return;
    }
    const auto timeline = kg.subject_relation_timeline(nodes[depth], rule.body[depth]);
    const Timestamp prev = times[depth - 1];
    auto first = options.strict_within_body
                     ? std::upper_bound(timeline.begin(), timeline.end(), prev,
                                        [&](Timestamp t, std::uint32_t p) { return t < edges[p].t; })
                     : std::lower_bound(timeline.begin(), timeline.end(), prev,
                                        [&](std::uint32_t p, Timestamp t) { return edges[p].t < t; });
    std::size_t taken = 0;
    for (auto it = timeline.end(); it != first;) {
      --it;
      if (taken == options.fanout_cap) {
        truncated = true;
        break;
      }
      ++taken;
      const Edge& e = edges[*it];
      nodes[depth + 1] = e.object;
      times[depth] = e.t;
      self(self, depth + 1);
    }
  };

  for (std::uint32_t pos : kg.by_relation(rule.body[0])) {
    const Edge& e = edges[pos];
    nodes[0] = e.subject;
    nodes[1] = e.object;
    times[0] = e.t;
    extend(extend, 1);
  }
  return truncated;
}

std::uint64_t pair_key(EntityId x, EntityId y) {
  return (static_cast<std::uint64_t>(value_of(x)) << 32) | value_of(y);
}

}  // namespace

GroundingResult ground_body(const Rule& rule, const TemporalKG& kg,
                            const GroundingOptions& options) {
  check_relations(rule, kg);
  using Key = std::tuple<EntityId, EntityId, std::vector<Timestamp>>;
  std::set<Key> seen;
  GroundingResult result;
  std::vector<std::pair<Key, Grounding>> found;
  result.truncated = enumerate_body(rule, kg, options, [&](const auto& nodes, const auto& times) {
    Key key{nodes.front(), nodes.back(), times};
    if (!seen.insert(key).second) return;
    Grounding g;
    g.substitution = nodes;
    g.times = times;
    g.latest_body_time = times.back();
    found.emplace_back(std::move(key), std::move(g));
  });
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  result.groundings.reserve(found.size());
  for (auto& [key, g] : found) result.groundings.push_back(std::move(g));
  return result;
}

ScoredRule confidence(const Rule& rule, const TemporalKG& kg, const ConfidenceOptions& options) {
  check_relations(rule, kg);
  ScoredRule scored;
  scored.rule = rule;
  if (rule.body.empty()) return scored;

  // (X, Y) -> latest body times of its groundings.
  std::unordered_map<std::uint64_t, std::vector<Timestamp>> pairs;
  enumerate_body(rule, kg, options.grounding, [&](const auto& nodes, const auto& times) {
    auto& t_os = pairs[pair_key(nodes.front(), nodes.back())];
    if (!options.horizon) {
      if (t_os.empty()) t_os.push_back(times.back());
      else t_os[0] = std::min(t_os[0], times.back());
    } else {
      t_os.push_back(times.back());
    }
  });

  const auto edges = kg.edges();
  for (auto& [key, t_os] : pairs) {
    std::sort(t_os.begin(), t_os.end());
    const EntityId x{static_cast<std::uint32_t>(key >> 32)};
    const EntityId y{static_cast<std::uint32_t>(key & 0xffffffffu)};
    bool satisfied = false;
    for (std::uint32_t pos : kg.subject_relation_timeline(x, rule.head)) {
      const Edge& h = edges[pos];
      if (h.object != y || h.t <= t_os.front()) continue;
      if (!options.horizon) {
        satisfied = true;
      } else {
        auto it = std::lower_bound(t_os.begin(), t_os.end(), h.t - *options.horizon);
        satisfied = it != t_os.end() && *it < h.t;
      }
      if (satisfied) break;
    }
    if (satisfied) ++scored.rule_support;
  }
  scored.body_support = pairs.size();
  scored.confidence = scored.body_support == 0
                          ? 0.0
                          : static_cast<double>(scored.rule_support) /
                                static_cast<double>(scored.body_support);
  return scored;
}

std::vector<ScoredRule> score_rules(std::span<const Rule> rules, const TemporalKG& kg,
                                    const ConfidenceOptions& options, std::size_t jobs) {
  std::vector<ScoredRule> out(rules.size());
  parallel_for(rules.size(), jobs, [&](std::size_t i) { out[i] = confidence(rules[i], kg, options); });
  return out;
}

RulePartition partition_by_threshold(std::span<const ScoredRule> rules, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in [0, 1]");
  RulePartition part;
  for (const ScoredRule& r : rules) {
    (r.confidence < theta ? part.low : part.high).push_back(r);
  }
  return part;
}

}  // namespace llmda
