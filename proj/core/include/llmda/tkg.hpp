#pragma once

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "llmda/catalog.hpp"
#include "llmda/types.hpp"

namespace llmda {

struct Catalogs {
  EntityCatalog entities;
  RelationCatalog relations;
};

struct KgStats {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t edges = 0;
  Timestamp min_t = 0;
  Timestamp max_t = 0;
};

/// Immutable indexed store of timestamped edges.
///
/// Edge positions are stable; every index holds positions into `edges()`.
/// Time-sorted indices are ascending in t with insertion order as the
/// secondary key.
class TemporalKG {
 public:
  TemporalKG(std::shared_ptr<const Catalogs> catalogs, std::vector<Edge> edges, bool with_inverses);

  const Catalogs& catalogs() const noexcept { return *catalogs_; }
  std::shared_ptr<const Catalogs> shared_catalogs() const noexcept { return catalogs_; }
  const EntityCatalog& entities() const noexcept { return catalogs_->entities; }
  const RelationCatalog& relations() const noexcept { return catalogs_->relations; }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::uint32_t pos) const { return edges_[pos]; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool with_inverses() const noexcept { return with_inverses_; }

  std::span<const std::uint32_t> by_subject(EntityId e) const noexcept;
  std::span<const std::uint32_t> by_relation(RelationId r) const noexcept;
  std::span<const std::uint32_t> subject_timeline(EntityId e) const noexcept;
  std::span<const std::uint32_t> subject_relation_timeline(EntityId e, RelationId r) const noexcept;

  /// Relations with at least one edge, ascending.
  std::vector<RelationId> relations_present() const;

  KgStats stats() const;

 private:
  static std::uint64_t pair_key(EntityId e, RelationId r) noexcept {
    return (static_cast<std::uint64_t>(value_of(e)) << 32) | value_of(r);
  }

  std::shared_ptr<const Catalogs> catalogs_;
  std::vector<Edge> edges_;
  bool with_inverses_;
  std::vector<std::vector<std::uint32_t>> by_subject_;
  std::vector<std::vector<std::uint32_t>> by_relation_;
  std::vector<std::vector<std::uint32_t>> subject_timeline_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> subject_relation_timeline_;
};

/// Builds a KG; with `add_inverses` each (s, r, o, t) is also stored as (o, inv_r, s, t).
TemporalKG build_kg(std::shared_ptr<const Catalogs> catalogs, std::span<const Quadruple> quads,
                    bool add_inverses);

/// Outgoing edges of `entity` with t < t_max (strict) or t <= t_max, most recent first.
/// Throws LookupError when `entity` is not in the catalog.
std::vector<Edge> neighbors_before(const TemporalKG& kg, EntityId entity, Timestamp t_max,
                                   bool strict);

std::string kg_stats_json(const KgStats& stats);

}  // namespace llmda
