#include "llmda/tkg.hpp"

#include <algorithm>
#include <limits>

#include "json.hpp"

namespace llmda {

namespace {

void sort_by_time(std::vector<std::uint32_t>& positions, const std::vector<Edge>& edges) {
  std::stable_sort(positions.begin(), positions.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return edges[a].t < edges[b].t; });
}

}  // namespace

TemporalKG::TemporalKG(std::shared_ptr<const Catalogs> catalogs, std::vector<Edge> edges,
                       bool with_inverses)
    : catalogs_(std::move(catalogs)), edges_(std::move(edges)), with_inverses_(with_inverses) {
  by_subject_.resize(catalogs_->entities.size());
  by_relation_.resize(catalogs_->relations.size());
  for (std::uint32_t pos = 0; pos < edges_.size(); ++pos) {
    const Edge& e = edges_[pos];
    if (!catalogs_->entities.contains(e.subject) || !catalogs_->entities.contains(e.object)) {
      throw ResolutionError("edge references an entity outside the catalog");
    }
    if (!catalogs_->relations.contains(e.relation)) {
      throw ResolutionError("edge references a relation outside the catalog");
    }
    by_subject_[value_of(e.subject)].push_back(pos);
    by_relation_[value_of(e.relation)].push_back(pos);
    subject_relation_timeline_[pair_key(e.subject, e.relation)].push_back(pos);
  }
  subject_timeline_ = by_subject_;
  for (auto& v : subject_timeline_) sort_by_time(v, edges_);
  for (auto& [key, v] : subject_relation_timeline_) sort_by_time(v, edges_);
}

std::span<const std::uint32_t> TemporalKG::by_subject(EntityId e) const noexcept {
  if (value_of(e) >= by_subject_.size()) return {};
  return by_subject_[value_of(e)];
}

std::span<const std::uint32_t> TemporalKG::by_relation(RelationId r) const noexcept {
  if (value_of(r) >= by_relation_.size()) return {};
  return by_relation_[value_of(r)];
}

std::span<const std::uint32_t> TemporalKG::subject_timeline(EntityId e) const noexcept {
  if (value_of(e) >= subject_timeline_.size()) return {};
  return subject_timeline_[value_of(e)];
}

std::span<const std::uint32_t> TemporalKG::subject_relation_timeline(EntityId e,
                                                                     RelationId r) const noexcept {
  auto it = subject_relation_timeline_.find(pair_key(e, r));
  if (it == subject_relation_timeline_.end()) return {};
  return it->second;
}

std::vector<RelationId> TemporalKG::relations_present() const {
  std::vector<RelationId> out;
  for (std::uint32_t r = 0; r < by_relation_.size(); ++r) {
    if (!by_relation_[r].empty()) out.push_back(RelationId{r});
  }
  return out;
}

KgStats TemporalKG::stats() const {
  KgStats s;
  s.entities = catalogs_->entities.size();
  s.relations = with_inverses_ ? catalogs_->relations.size() : catalogs_->relations.forward_count();
  s.edges = edges_.size();
  if (!edges_.empty()) {
    s.min_t = std::numeric_limits<Timestamp>::max();
    s.max_t = std::numeric_limits<Timestamp>::min();
    for (const Edge& e : edges_) {
      s.min_t = std::min(s.min_t, e.t);
      s.max_t = std::max(s.max_t, e.t);
    }
  }
  return s;
}

TemporalKG build_kg(std::shared_ptr<const Catalogs> catalogs, std::span<const Quadruple> quads,
                    bool add_inverses) {
  std::vector<Edge> edges;
  edges.reserve(add_inverses ? 2 * quads.size() : quads.size());
  for (const Quadruple& q : quads) {
    edges.push_back(q);
    if (add_inverses) edges.push_back({q.object, inverse_of(q.relation), q.subject, q.t});
  }
  return TemporalKG(std::move(catalogs), std::move(edges), add_inverses);
}

std::vector<Edge> neighbors_before(const TemporalKG& kg, EntityId entity, Timestamp t_max,
                                   bool strict) {
  if (!kg.entities().contains(entity)) {
    throw LookupError("unknown entity id " + std::to_string(value_of(entity)));
  }
  const auto timeline = kg.subject_timeline(entity);
  const auto edges = kg.edges();
  auto end = strict ? std::lower_bound(timeline.begin(), timeline.end(), t_max,
                                       [&](std::uint32_t p, Timestamp t) { return edges[p].t < t; })
                    : std::upper_bound(timeline.begin(), timeline.end(), t_max,
                                       [&](Timestamp t, std::uint32_t p) { return t < edges[p].t; });
  std::vector<Edge> out;
  out.reserve(static_cast<std::size_t>(end - timeline.begin()));
  for (auto it = end; it != timeline.begin();) {
    --it;
    out.push_back(edges[*it]);
  }
  return out;
}

std::string kg_stats_json(const KgStats& stats) {
  nlohmann::ordered_json j;
  j["entities"] = stats.entities;
  j["relations"] = stats.relations;
  j["edges"] = stats.edges;
  j["min_t"] = stats.min_t;
  j["max_t"] = stats.max_t;
  return j.dump();
}

}  // namespace llmda
