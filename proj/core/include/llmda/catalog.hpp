#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "llmda/types.hpp"

namespace llmda {

class EntityCatalog {
 public:
  /// Returns the id of `name`, inserting it at the next dense id if new.
  EntityId intern(std::string_view name);
  /// Inserts `name` with an explicit id (id-map loading). Throws ValidationError on conflict.
  void assign(std::string_view name, EntityId id);

  std::optional<EntityId> find(std::string_view name) const;
  const std::string& name(EntityId id) const;
  bool contains(EntityId id) const noexcept;
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::vector<bool> present_;
  std::unordered_map<std::string, EntityId> ids_;
};

/// Forward relations plus their "inv_" counterparts.
///
/// Names are matched either exactly or after normalization (whitespace
/// folded into underscores), so prompt-facing names like "Make_statement"
/// resolve against a raw ICEWS label "Make statement".
class RelationCatalog {
 public:
  static constexpr std::string_view kInversePrefix = "inv_";

  RelationId intern(std::string_view forward_name);
  void assign(std::string_view forward_name, std::uint32_t forward_index);

  /// Accepts forward names, "inv_"-prefixed names, and normalized forms of either.
  std::optional<RelationId> find(std::string_view name) const;
  const std::string& name(RelationId id) const;
  /// Normalized name used in prompts and rule text.
  std::string display_name(RelationId id) const;

  bool contains(RelationId id) const noexcept;
  std::size_t forward_count() const noexcept { return forward_.size(); }
  /// Forward plus inverse relations.
  std::size_t size() const noexcept { return 2 * forward_.size(); }
  /// All valid relation ids in ascending order.
  std::vector<RelationId> all() const;

  static RelationId forward_id(std::uint32_t forward_index) noexcept {
    return RelationId{2 * forward_index};
  }
  static std::uint32_t forward_index(RelationId id) noexcept { return value_of(id) >> 1; }

 private:
  void index_names(std::uint32_t forward_index);

  std::vector<std::string> forward_;
  std::vector<std::string> inverse_;
  std::vector<bool> present_;
  std::unordered_map<std::string, RelationId> exact_;
  std::unordered_map<std::string, RelationId> normalized_;
};

/// Folds whitespace into underscores and drops whitespace adjacent to an underscore.
std::string normalize_relation_name(std::string_view name);

}  // namespace llmda
