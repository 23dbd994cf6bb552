// Brute-force reference enumerators. Everything here works on plain edge
// lists by exhaustive search and shares no code with the library beyond the
// id types.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "llmda/catalog.hpp"
#include "llmda/rule.hpp"
#include "llmda/types.hpp"

namespace oracle {

using llmda::EntityId;
using llmda::Quadruple;
using llmda::RelationId;
using llmda::Timestamp;

inline RelationId flip(RelationId r) { return RelationId{static_cast<std::uint32_t>(r) ^ 1u}; }

/// Raw quadruples plus their reversed copies.
inline std::vector<Quadruple> augment(const std::vector<Quadruple>& quads) {
  std::vector<Quadruple> out = quads;
  for (const auto& q : quads) out.push_back({q.object, flip(q.relation), q.subject, q.t});
  return out;
}

/// Every chain e_1..e_k of edges with e_i.object == e_{i+1}.subject, times
/// non-decreasing (or increasing when strict), every time < before, first
/// edge leaving `from` (any subject when from is unset), relations matching
/// `relations` when given. Edges may repeat.
inline std::vector<std::vector<Quadruple>> chains(const std::vector<Quadruple>& edges, std::size_t k,
                                                  std::optional<EntityId> from, Timestamp before,
                                                  const std::vector<RelationId>* relations, bool strict) {
  std::vector<std::vector<Quadruple>> out;
  std::vector<Quadruple> current;
  auto rec = [&](auto&& self) -> void {
    if (current.size() == k) {
      out.push_back(current);
      return;
    }
    const std::size_t i = current.size();
    for (const auto& e : edges) {
      if (e.t >= before) continue;
      if (relations && e.relation != (*relations)[i]) continue;
      if (i == 0) {
        if (from && e.subject != *from) continue;
      } else {
        const auto& prev = current.back();
        if (e.subject != prev.object) continue;
        if (strict ? e.t <= prev.t : e.t < prev.t) continue;
      }
      current.push_back(e);
      self(self);
      current.pop_back();
    }
  };
  if (k > 0) rec(rec);
  return out;
}

/// Closed chains for one anchor: X = anchor.subject to Y = anchor.object,
/// all body times < anchor.t.
inline std::vector<std::vector<Quadruple>> closed_chains(const std::vector<Quadruple>& edges,
                                                         const Quadruple& anchor, std::size_t k, bool strict) {
  std::vector<std::vector<Quadruple>> out;
  for (auto& c : chains(edges, k, anchor.subject, anchor.t, nullptr, strict)) {
    if (c.back().object == anchor.object) out.push_back(std::move(c));
  }
  return out;
}

/// True when `rule` has at least one closed grounding under some head edge.
inline bool rule_has_closed_grounding(const std::vector<Quadruple>& edges, const llmda::Rule& rule, bool strict) {
  for (const auto& a : edges) {
    if (a.relation != rule.head) continue;
    for (const auto& c : chains(edges, rule.body.size(), a.subject, a.t, &rule.body, strict)) {
      if (c.back().object == a.object) return true;
    }
  }
  return false;
}

/// Exact confidence counts by enumeration: body pairs (X, Y) with their
/// earliest latest-body-time, and the pairs followed by a head edge.
struct Counts {
  std::uint64_t body_support = 0;
  std::uint64_t rule_support = 0;
};

inline Counts confidence(const std::vector<Quadruple>& edges, const llmda::Rule& rule, bool strict,
                         std::optional<Timestamp> horizon = std::nullopt) {
  constexpr Timestamp kNoLimit = std::numeric_limits<Timestamp>::max();
  // All latest body times per pair.
  std::map<std::pair<EntityId, EntityId>, std::set<Timestamp>> pairs;
  for (const auto& c : chains(edges, rule.body.size(), std::nullopt, kNoLimit, &rule.body, strict)) {
    pairs[{c.front().subject, c.back().object}].insert(c.back().t);
  }
  Counts out;
  out.body_support = pairs.size();
  for (const auto& [pair, latest] : pairs) {
    bool hit = false;
    for (const auto& e : edges) {
      if (e.relation != rule.head || e.subject != pair.first || e.object != pair.second) continue;
      for (Timestamp t_o : latest) {
        if (e.t > t_o && (!horizon || e.t <= t_o + *horizon)) hit = true;
      }
    }
    if (hit) ++out.rule_support;
  }
  return out;
}

/// (X, Y, body times) groundings.
inline std::set<std::tuple<EntityId, EntityId, std::vector<Timestamp>>> groundings(
    const std::vector<Quadruple>& edges, const llmda::Rule& rule, bool strict) {
  std::set<std::tuple<EntityId, EntityId, std::vector<Timestamp>>> out;
  for (const auto& c : chains(edges, rule.body.size(), std::nullopt, std::numeric_limits<Timestamp>::max(),
                              &rule.body, strict)) {
    std::vector<Timestamp> times;
    for (const auto& e : c) times.push_back(e.t);
    out.emplace(c.front().subject, c.back().object, std::move(times));
  }
  return out;
}

/// Rule application: distinct (candidate, body times) reachable from `subject`
/// with every body time < t_q.
inline std::set<std::pair<EntityId, std::vector<Timestamp>>> applications(const std::vector<Quadruple>& edges,
                                                                          const llmda::Rule& rule,
                                                                          EntityId subject, Timestamp t_q,
                                                                          bool strict) {
  std::set<std::pair<EntityId, std::vector<Timestamp>>> out;
  for (const auto& c : chains(edges, rule.body.size(), subject, t_q, &rule.body, strict)) {
    std::vector<Timestamp> times;
    for (const auto& e : c) times.push_back(e.t);
    out.emplace(c.back().object, std::move(times));
  }
  return out;
}

/// Random small dataset: no self loops, relation names "r0".."rN".
struct RandomKg {
  llmda::RelationCatalog relations;
  std::vector<Quadruple> quads;
  std::size_t entities = 0;
};

inline RandomKg random_kg(std::mt19937_64& rng, std::size_t max_quads, std::size_t max_entities = 7,
                          std::size_t max_relations = 3, Timestamp max_t = 8) {
  RandomKg kg;
  kg.entities = std::uniform_int_distribution<std::size_t>(2, max_entities)(rng);
  const auto n_rel = std::uniform_int_distribution<std::size_t>(1, max_relations)(rng);
  for (std::size_t j = 0; j < n_rel; ++j) kg.relations.intern("r" + std::to_string(j));
  const auto n = std::uniform_int_distribution<std::size_t>(1, max_quads)(rng);
  std::uniform_int_distribution<std::uint32_t> ent(0, static_cast<std::uint32_t>(kg.entities - 1));
  std::uniform_int_distribution<std::uint32_t> rel(0, static_cast<std::uint32_t>(n_rel - 1));
  std::uniform_int_distribution<Timestamp> time(0, max_t);
  while (kg.quads.size() < n) {
    const auto s = ent(rng);
    const auto o = ent(rng);
    if (s == o) continue;
    kg.quads.push_back({EntityId{s}, RelationId{2 * rel(rng)}, EntityId{o}, time(rng)});
  }
  return kg;
}

inline llmda::Rule random_rule(std::mt19937_64& rng, std::size_t relation_count, std::size_t max_len) {
  std::uniform_int_distribution<std::uint32_t> rel(0, static_cast<std::uint32_t>(relation_count - 1));
  llmda::Rule r;
  r.head = RelationId{rel(rng)};
  const auto len = std::uniform_int_distribution<std::size_t>(1, max_len)(rng);
  for (std::size_t i = 0; i < len; ++i) r.body.push_back(RelationId{rel(rng)});
  return r;
}

}  // namespace oracle

namespace oracle {

/// Checks a sampled closed path against the exhaustive enumeration. Returns an
/// empty string when valid, else what is wrong. `rule_out` receives the rule
/// read off the path.
inline std::string check_path(const std::vector<Quadruple>& edges, const Quadruple& anchor,
                              const std::vector<EntityId>& nodes, const std::vector<Quadruple>& body,
                              bool strict, llmda::Rule* rule_out = nullptr) {
  if (std::find(edges.begin(), edges.end(), anchor) == edges.end()) return "anchor is not an edge";
  if (body.empty() || nodes.size() != body.size() + 1) return "shape";
  if (nodes.front() != anchor.subject || nodes.back() != anchor.object) return "not closed";
  std::vector<Quadruple> oriented;
  llmda::Rule rule{anchor.relation, {}};
  for (std::size_t i = 0; i < body.size(); ++i) {
    const auto& e = body[i];
    Quadruple o;
    if (e.subject == nodes[i] && e.object == nodes[i + 1]) {
      o = e;
    } else if (e.object == nodes[i] && e.subject == nodes[i + 1]) {
      o = {e.object, flip(e.relation), e.subject, e.t};
    } else {
      return "edge " + std::to_string(i) + " does not connect its nodes";
    }
    if (std::find(edges.begin(), edges.end(), e) == edges.end()) return "body edge is not in the KG";
    oriented.push_back(o);
    rule.body.push_back(o.relation);
  }
  for (std::size_t i = 0; i < oriented.size(); ++i) {
    if (oriented[i].t >= anchor.t) return "body time not before head time";
    if (i > 0 && (strict ? oriented[i].t <= oriented[i - 1].t : oriented[i].t < oriented[i - 1].t)) {
      return "body times out of order";
    }
  }
  const auto all = closed_chains(edges, anchor, body.size(), strict);
  if (std::find(all.begin(), all.end(), oriented) == all.end()) return "not among enumerated closed chains";
  if (rule_out) *rule_out = rule;
  return {};
}

}  // namespace oracle
