#include "llmda/selector.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "llmda/random.hpp"

namespace llmda {

EmbeddingVector TrigramEmbedder::embed(const std::string& text) {
  EmbeddingVector v(kDimension, 0.0);
  if (text.empty()) return v;
  std::string padded;
  padded.reserve(text.size() + 2);
  padded.push_back(' ');
  for (char c : text) padded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  padded.push_back(' ');
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    v[fnv1a64(std::string_view(padded).substr(i, 3)) % kDimension] += 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

EmbeddingVector fallback_embed(const std::string& text) { return TrigramEmbedder{}.embed(text); }

CachedEmbeddingProvider::CachedEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                                 std::filesystem::path cache_file)
    : inner_(std::move(inner)), path_(std::move(cache_file)) {
  std::ifstream in(path_);
  std::string line;
  const std::string me = inner_->id();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || j.value("provider", "") != me) continue;
    cache_[j.at("text").get<std::string>()] = j.at("vector").get<EmbeddingVector>();
  }
}

EmbeddingVector CachedEmbeddingProvider::embed(const std::string& text) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(text); it != cache_.end()) return it->second;
  }
  EmbeddingVector v = inner_->embed(text);
  std::lock_guard lock(mutex_);
  if (cache_.emplace(text, v).second) {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    nlohmann::ordered_json j;
    j["provider"] = inner_->id();
    j["text"] = text;
    j["vector"] = v;
    out << j.dump() << '\n';
  }
  return v;
}

std::size_t CachedEmbeddingProvider::cached_entries() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

double relevance(const EmbeddingVector& head, const EmbeddingVector& candidate) {
  if (head.size() != candidate.size()) throw ValidationError("embedding dimensions differ");
  double dot = 0.0;
  double nh = 0.0;
  double nc = 0.0;
  for (std::size_t i = 0; i < head.size(); ++i) {
    dot += head[i] * candidate[i];
    nh += head[i] * head[i];
    nc += candidate[i] * candidate[i];
  }
  if (nh == 0.0 || nc == 0.0) throw DegenerateInputError("zero-norm embedding");
  return std::clamp(dot / (std::sqrt(nh) * std::sqrt(nc)), -1.0, 1.0);
}

std::string relation_surface_form(const std::string& name) {
  std::string base = name;
  std::string prefix;
  if (base.starts_with(RelationCatalog::kInversePrefix)) {
    base = base.substr(RelationCatalog::kInversePrefix.size());
    prefix = "inverse of ";
  }
  std::replace(base.begin(), base.end(), '_', ' ');
  return prefix + base;
}

RelationSelector::RelationSelector(const RelationCatalog& catalog, EmbeddingProvider& provider,
                                   SelectorConfig config)
    : catalog_(catalog), config_(config), relations_(catalog.all()) {
  if (config_.k == 0 || config_.k > relations_.size()) {
    throw ValidationError("k = " + std::to_string(config_.k) + " outside [1, " +
                          std::to_string(relations_.size()) + "]");
  }
  vectors_.reserve(relations_.size());
  for (RelationId r : relations_) {
    vectors_.push_back(provider.embed(relation_surface_form(catalog_.display_name(r))));
  }
}

std::vector<RelationId> RelationSelector::top_k(RelationId head) const {
  auto it = std::lower_bound(relations_.begin(), relations_.end(), head);
  if (it == relations_.end() || *it != head) {
    throw LookupError("relation " + std::to_string(value_of(head)) + " is not in the catalog");
  }
  const EmbeddingVector& hv = vectors_[static_cast<std::size_t>(it - relations_.begin())];
  struct Scored {
    double score;
    const std::string* name;
    RelationId id;
  };
  std::vector<Scored> scored;
  scored.reserve(relations_.size());
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    scored.push_back({relevance(hv, vectors_[i]), &catalog_.name(relations_[i]), relations_[i]});
  }
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(config_.k),
                    scored.end(), [](const Scored& a, const Scored& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return *a.name < *b.name;
                    });
  std::vector<RelationId> out;
  out.reserve(config_.k);
  for (std::size_t i = 0; i < config_.k; ++i) out.push_back(scored[i].id);
  return out;
}

std::vector<RelationId> top_k_relations(RelationId head, const RelationCatalog& catalog,
                                        EmbeddingProvider& provider, const SelectorConfig& config) {
  return RelationSelector(catalog, provider, config).top_k(head);
}

}  // namespace llmda
