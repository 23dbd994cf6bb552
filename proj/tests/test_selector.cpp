#include <cmath>
#include <set>

#include "doctest.h"
#include "llmda/selector.hpp"
#include "test_util.hpp"

using namespace llmda;

namespace {

/// Fixed vectors per text, optionally scaled.
class TableEmbedder final : public EmbeddingProvider {
 public:
  explicit TableEmbedder(double scale = 1.0) : scale_(scale) {}
  EmbeddingVector embed(const std::string& text) override {
    ++calls;
    EmbeddingVector v = fallback_embed(text);
    for (auto& x : v) x *= scale_;
    return v;
  }
  std::size_t dimension() const override { return TrigramEmbedder::kDimension; }
  std::string id() const override { return "table"; }
  int calls = 0;

 private:
  double scale_;
};

RelationCatalog sample_catalog() {
  RelationCatalog c;
  for (const char* n : {"Consult", "Provide aid", "Make a visit", "Host a visit", "Sign formal agreement"}) c.intern(n);
  return c;
}

}  // namespace

TEST_CASE("relevance is cosine similarity") {
  const EmbeddingVector v{1.0, 2.0, 3.0};
  CHECK(relevance(v, v) == doctest::Approx(1.0));
  CHECK(relevance({1.0, 0.0}, {0.0, 2.0}) == 0.0);
  CHECK(relevance(v, {3.0, 6.0, 9.0}) == doctest::Approx(1.0));
  CHECK(relevance({1.0, 0.0}, {0.5, 0.5}) == doctest::Approx(relevance({0.5, 0.5}, {1.0, 0.0})));
  CHECK_THROWS_AS(relevance({0.0, 0.0}, {1.0, 0.0}), DegenerateInputError);
  CHECK_THROWS_AS(relevance({1.0}, {1.0, 0.0}), ValidationError);
}

TEST_CASE("fallback embedder") {
  CHECK(fallback_embed("abc") == fallback_embed("abc"));
  CHECK(fallback_embed("abc").size() == 512);
  double norm = 0;
  for (double x : fallback_embed("Consult")) norm += x * x;
  CHECK(norm == doctest::Approx(1.0));
  const auto empty = fallback_embed("");
  CHECK(std::all_of(empty.begin(), empty.end(), [](double x) { return x == 0.0; }));
  CHECK_THROWS_AS(relevance(empty, fallback_embed("a")), DegenerateInputError);
  CHECK(relevance(fallback_embed("Consult"), fallback_embed("inv_Consult")) >
        relevance(fallback_embed("Consult"), fallback_embed("Provide_aid")));
  CHECK(relevance(fallback_embed("president_of"), fallback_embed("politician_of")) >
        relevance(fallback_embed("president_of"), fallback_embed("qzxv wkjh")));
}

TEST_CASE("surface form") {
  CHECK(relation_surface_form("inv_Make_a_visit") == "inverse of Make a visit");
  CHECK(relation_surface_form("Provide_aid") == "Provide aid");
}

TEST_CASE("top-k ranks the head first and returns exactly k distinct relations") {
  auto c = sample_catalog();
  TrigramEmbedder emb;
  const auto head = *c.find("Make_a_visit");
  const auto top = top_k_relations(head, c, emb, {4});
  REQUIRE(top.size() == 4);
  CHECK(top[0] == head);
  CHECK(std::set<RelationId>(top.begin(), top.end()).size() == 4);
  const auto all = top_k_relations(head, c, emb, {c.size()});
  CHECK(all.size() == c.size());
  CHECK_THROWS_AS(top_k_relations(head, c, emb, {c.size() + 1}), ValidationError);
  CHECK_THROWS_AS(top_k_relations(head, c, emb, {0}), ValidationError);
}

TEST_CASE("property: positive scaling of embeddings leaves the ranking unchanged") {
  auto c = sample_catalog();
  for (double scale : {0.25, 2.0, 8.0, 1024.0}) {
    TableEmbedder base, scaled(scale);
    for (RelationId head : c.all()) {
      CHECK(top_k_relations(head, c, base, {6}) == top_k_relations(head, c, scaled, {6}));
    }
  }
}

TEST_CASE("precomputed selector embeds each relation once and matches the free function") {
  auto c = sample_catalog();
  TableEmbedder emb;
  const RelationSelector sel(c, emb, {5});
  CHECK(emb.calls == static_cast<int>(c.size()));
  TrigramEmbedder plain;
  for (RelationId head : c.all()) CHECK(sel.top_k(head) == top_k_relations(head, c, plain, {5}));
}

TEST_CASE("embedding cache persists vectors per provider") {
  testutil::TempDir dir;
  auto inner = std::make_shared<TableEmbedder>();
  {
    CachedEmbeddingProvider cached(inner, dir / "cache.jsonl");
    const auto v = cached.embed("Consult");
    CHECK(cached.embed("Consult") == v);
    CHECK(inner->calls == 1);
  }
  CachedEmbeddingProvider reloaded(inner, dir / "cache.jsonl");
  CHECK(reloaded.cached_entries() == 1);
  CHECK(reloaded.embed("Consult") == fallback_embed("Consult"));
  CHECK(inner->calls == 1);
}
