#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "llmda/catalog.hpp"

namespace llmda {

using EmbeddingVector = std::vector<double>;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string id() const = 0;
};

/// Hashed character-trigram counts (text padded with one space on each side),
/// L2-normalized. The empty string maps to the zero vector.
class TrigramEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDimension = 512;

  EmbeddingVector embed(const std::string& text) override;
  std::size_t dimension() const override { return kDimension; }
  std::string id() const override { return "fallback-trigram"; }
};

EmbeddingVector fallback_embed(const std::string& text);

/// Memoizes another provider in a JSON Lines file of {provider, text, vector}.
/// Entries for other providers in the same file are kept but ignored.
class CachedEmbeddingProvider final : public EmbeddingProvider {
 public:
  CachedEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner, std::filesystem::path cache_file);

  EmbeddingVector embed(const std::string& text) override;
  std::size_t dimension() const override { return inner_->dimension(); }
  std::string id() const override { return inner_->id(); }
  std::size_t cached_entries() const;

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::string, EmbeddingVector> cache_;
};

/// Cosine similarity. Throws ValidationError on a dimension mismatch and
/// DegenerateInputError when either vector has zero norm.
double relevance(const EmbeddingVector& head, const EmbeddingVector& candidate);

struct SelectorConfig {
  std::size_t k = 20;
};

/// Text handed to the embedding model: "inv_" becomes "inverse of ", underscores become spaces.
std::string relation_surface_form(const std::string& name);

/// The k catalog relations (forward and inverse) most similar to `head`,
/// descending by cosine, ties by ascending name.
std::vector<RelationId> top_k_relations(RelationId head, const RelationCatalog& catalog,
                                        EmbeddingProvider& provider, const SelectorConfig& config);

/// Precomputes top-k lists for many heads, embedding each relation once.
class RelationSelector {
 public:
  RelationSelector(const RelationCatalog& catalog, EmbeddingProvider& provider, SelectorConfig config);
  std::vector<RelationId> top_k(RelationId head) const;
  std::size_t k() const noexcept { return config_.k; }

 private:
  const RelationCatalog& catalog_;
  SelectorConfig config_;
  std::vector<RelationId> relations_;
  std::vector<EmbeddingVector> vectors_;
};

}  // namespace llmda
