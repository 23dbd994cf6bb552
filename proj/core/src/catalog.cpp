#include "llmda/catalog.hpp"

#include <cctype>

namespace llmda {

EntityId EntityCatalog::intern(std::string_view name) {
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  const EntityId id{static_cast<std::uint32_t>(names_.size())};
  names_.emplace_back(name);
  present_.push_back(true);
  ids_.emplace(std::string(name), id);
  return id;
}

void EntityCatalog::assign(std::string_view name, EntityId id) {
  const auto idx = value_of(id);
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) {
    if (it->second != id) throw ValidationError("entity '" + std::string(name) + "' mapped twice");
    return;
  }
  if (idx < present_.size() && present_[idx]) {
    throw ValidationError("entity id " + std::to_string(idx) + " assigned twice");
  }
  if (idx >= names_.size()) {
    names_.resize(idx + 1);
    present_.resize(idx + 1, false);
  }
  names_[idx] = std::string(name);
  present_[idx] = true;
  ids_.emplace(std::string(name), id);
}

std::optional<EntityId> EntityCatalog::find(std::string_view name) const {
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  return std::nullopt;
}

const std::string& EntityCatalog::name(EntityId id) const {
  if (!contains(id)) throw LookupError("unknown entity id " + std::to_string(value_of(id)));
  return names_[value_of(id)];
}

bool EntityCatalog::contains(EntityId id) const noexcept {
  return value_of(id) < present_.size() && present_[value_of(id)];
}

std::string normalize_relation_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  std::size_t i = 0;
  while (i < name.size() && std::isspace(static_cast<unsigned char>(name[i]))) ++i;
  std::size_t end = name.size();
  while (end > i && std::isspace(static_cast<unsigned char>(name[end - 1]))) --end;
  for (; i < end; ++i) {
    const char c = name[i];
    if (!std::isspace(static_cast<unsigned char>(c))) {
      out.push_back(c);
      continue;
    }
    std::size_t j = i;
    while (j < end && std::isspace(static_cast<unsigned char>(name[j]))) ++j;
    const bool after_us = !out.empty() && out.back() == '_';
    const bool before_us = j < end && name[j] == '_';
    if (!after_us && !before_us) out.push_back('_');
    i = j - 1;
  }
  return out;
}

RelationId RelationCatalog::intern(std::string_view forward_name) {
  if (auto it = exact_.find(std::string(forward_name)); it != exact_.end()) {
    if (is_inverse(it->second)) {
      throw ValidationError("relation name '" + std::string(forward_name) +
                            "' collides with an inverse relation");
    }
    return it->second;
  }
  const auto idx = static_cast<std::uint32_t>(forward_.size());
  forward_.emplace_back(forward_name);
  inverse_.push_back(std::string(kInversePrefix) + std::string(forward_name));
  present_.push_back(true);
  index_names(idx);
  return forward_id(idx);
}

void RelationCatalog::assign(std::string_view forward_name, std::uint32_t forward_index) {
  if (auto it = exact_.find(std::string(forward_name)); it != exact_.end()) {
    if (it->second != forward_id(forward_index)) {
      throw ValidationError("relation '" + std::string(forward_name) + "' mapped twice");
    }
    return;
  }
  if (forward_index < present_.size() && present_[forward_index]) {
    throw ValidationError("relation id " + std::to_string(forward_index) + " assigned twice");
  }
  if (forward_index >= forward_.size()) {
    forward_.resize(forward_index + 1);
    inverse_.resize(forward_index + 1);
    present_.resize(forward_index + 1, false);
  }
  forward_[forward_index] = std::string(forward_name);
  inverse_[forward_index] = std::string(kInversePrefix) + std::string(forward_name);
  present_[forward_index] = true;
  index_names(forward_index);
}

void RelationCatalog::index_names(std::uint32_t idx) {
  const RelationId fwd = forward_id(idx);
  const RelationId inv = inverse_of(fwd);
  if (exact_.contains(inverse_[idx])) {
    throw ValidationError("relation name '" + inverse_[idx] + "' is not unique");
  }
  exact_.emplace(forward_[idx], fwd);
  exact_.emplace(inverse_[idx], inv);
  normalized_.emplace(normalize_relation_name(forward_[idx]), fwd);
  normalized_.emplace(normalize_relation_name(inverse_[idx]), inv);
}

std::optional<RelationId> RelationCatalog::find(std::string_view name) const {
  if (auto it = exact_.find(std::string(name)); it != exact_.end()) return it->second;
  if (auto it = normalized_.find(normalize_relation_name(name)); it != normalized_.end()) {
    return it->second;
  }
  return std::nullopt;
}

const std::string& RelationCatalog::name(RelationId id) const {
  if (!contains(id)) throw LookupError("unknown relation id " + std::to_string(value_of(id)));
  const auto idx = forward_index(id);
  return is_inverse(id) ? inverse_[idx] : forward_[idx];
}

std::string RelationCatalog::display_name(RelationId id) const {
  return normalize_relation_name(name(id));
}

bool RelationCatalog::contains(RelationId id) const noexcept {
  const auto idx = forward_index(id);
  return idx < present_.size() && present_[idx];
}

std::vector<RelationId> RelationCatalog::all() const {
  std::vector<RelationId> out;
  out.reserve(size());
  for (std::uint32_t i = 0; i < present_.size(); ++i) {
    if (!present_[i]) continue;
    out.push_back(forward_id(i));
    out.push_back(inverse_of(forward_id(i)));
  }
  return out;
}

}  // namespace llmda
