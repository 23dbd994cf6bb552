#include <cmath>
#include <random>

#include "doctest.h"
#include "llmda/reasoner.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace llmda;
using testutil::TempDir;

namespace {

struct Fixture {
  std::shared_ptr<Catalogs> catalogs = std::make_shared<Catalogs>();
  EntityId a, b, c, d, e;
  RelationId r1, r2;
  Fixture() {
    a = catalogs->entities.intern("a");
    b = catalogs->entities.intern("b");
    c = catalogs->entities.intern("c");
    d = catalogs->entities.intern("d");
    e = catalogs->entities.intern("e");
    r1 = catalogs->relations.intern("r1");
    r2 = catalogs->relations.intern("r2");
  }
  TemporalKG kg(const std::vector<Quadruple>& q) const { return build_kg(catalogs, q, true); }
};

ScoredRule scored(Rule r, double c) {
  ScoredRule s;
  s.rule = std::move(r);
  s.confidence = c;
  return s;
}

std::vector<EntityId> order(const std::vector<CandidateScore>& v) {
  std::vector<EntityId> out;
  for (const auto& c : v) out.push_back(c.entity);
  return out;
}

/// Ranking of one side alone under the shared tie-break.
std::vector<EntityId> side_order(const ScoreMap& side, const ScoreMap& other) {
  std::vector<std::pair<double, EntityId>> v;
  for (const auto& [e, s] : side) v.emplace_back(s, e);
  for (const auto& [e, s] : other) {
    if (!side.contains(e)) v.emplace_back(0.0, e);
  }
  std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  std::vector<EntityId> out;
  for (const auto& [s, e] : v) out.push_back(e);
  return out;
}

}  // namespace

TEST_CASE("high-confidence selection is strict and order preserving") {
  Fixture f;
  const std::vector<ScoredRule> rules{scored(Rule{f.r2, {f.r1}}, 0.5), scored(Rule{f.r1, {f.r2}}, 0.01),
                                      scored(Rule{f.r2, {f.r2}}, 0.2)};
  const auto hi = select_high_confidence(rules, 0.01);
  REQUIRE(hi.size() == 2);
  CHECK(hi[0].confidence == 0.5);
  CHECK(hi[1].confidence == 0.2);
  CHECK(select_high_confidence(rules, 0.0).size() == 3);
  CHECK(select_high_confidence(rules, 1.0).empty());
}

TEST_CASE("apply_rule respects the query time") {
  Fixture f;
  const auto kg = f.kg({{f.a, f.r1, f.b, 1}, {f.a, f.r1, f.c, 6}});
  const auto res = apply_rule(Rule{f.r2, {f.r1}}, Query{f.a, f.r2, 5, {}}, kg);
  REQUIRE(res.matches.size() == 1);
  CHECK(res.matches[0].candidate == f.b);
  CHECK(res.matches[0].latest_body_time == 1);
  CHECK_FALSE(res.truncated);
  CHECK_THROWS_AS(apply_rule(Rule{f.r1, {f.r1}}, Query{f.a, f.r2, 5, {}}, kg), ValidationError);
  // An edge at exactly the query time is not evidence.
  const auto at = apply_rule(Rule{f.r2, {f.r1}}, Query{f.a, f.r2, 6, {}}, kg);
  CHECK(at.matches.size() == 1);
}

TEST_CASE("two-hop rule on a four-edge chain") {
  Fixture f;
  const auto kg = f.kg({{f.a, f.r1, f.b, 1}, {f.b, f.r2, f.c, 2}, {f.c, f.r1, f.d, 3}, {f.d, f.r2, f.e, 4}});
  const auto res = apply_rule(Rule{f.r1, {f.r1, f.r2}}, Query{f.a, f.r1, 10, {}}, kg);
  REQUIRE(res.matches.size() == 1);
  CHECK(res.matches[0].candidate == f.c);
  CHECK(res.matches[0].latest_body_time == 2);
  // Out-of-order times do not chain.
  const auto kg2 = f.kg({{f.a, f.r1, f.b, 3}, {f.b, f.r2, f.c, 2}});
  CHECK(apply_rule(Rule{f.r1, {f.r1, f.r2}}, Query{f.a, f.r1, 10, {}}, kg2).matches.empty());
}

TEST_CASE("fanout cap keeps the most recent expansions") {
  Fixture f;
  std::vector<Quadruple> q;
  for (Timestamp t = 0; t < 10; ++t) q.push_back({f.a, f.r1, f.b, t});
  const auto kg = f.kg(q);
  const auto res = apply_rule(Rule{f.r2, {f.r1}}, Query{f.a, f.r2, 20, {}}, kg, 3);
  CHECK(res.truncated);
  REQUIRE(res.matches.size() == 3);
  CHECK(res.matches.front().latest_body_time == 7);
  CHECK(res.matches.back().latest_body_time == 9);
}

TEST_CASE("property: apply_rule matches enumeration") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 60; ++trial) {
    auto rk = oracle::random_kg(rng, 25);
    auto catalogs = std::make_shared<Catalogs>();
    catalogs->relations = rk.relations;
    for (std::size_t i = 0; i < rk.entities; ++i) catalogs->entities.intern("e" + std::to_string(i));
    const auto kg = build_kg(catalogs, rk.quads, true);
    const auto edges = oracle::augment(rk.quads);
    for (int k = 0; k < 5; ++k) {
      const Rule rule = oracle::random_rule(rng, catalogs->relations.size(), 3);
      const EntityId s{static_cast<std::uint32_t>(rng() % rk.entities)};
      const Timestamp t = static_cast<Timestamp>(rng() % 10);
      std::multiset<std::pair<EntityId, Timestamp>> want;
      for (const auto& [cand, times] : oracle::applications(edges, rule, s, t, false)) {
        want.emplace(cand, times.back());
      }
      std::multiset<std::pair<EntityId, Timestamp>> got;
      for (const auto& m : apply_rule(rule, Query{s, rule.head, t, {}}, kg).matches) {
        got.emplace(m.candidate, m.latest_body_time);
      }
      CHECK(got == want);
    }
  }
}

TEST_CASE("rule score and the recency baseline") {
  Fixture f;
  const auto kg = f.kg({{f.a, f.r1, f.b, 7}});
  const std::vector<ScoredRule> rules{scored(Rule{f.r2, {f.r1}}, 0.5)};
  const auto s = rule_score(Query{f.a, f.r2, 10, {}}, rules, kg, FusionConfig{});
  REQUIRE(s.size() == 1);
  CHECK(s.at(f.b) == doctest::Approx(1.240818).epsilon(1e-6));
  CHECK(rule_score(Query{f.a, f.r1, 10, {}}, rules, kg, FusionConfig{}).empty());

  const auto two = f.kg({{f.a, f.r1, f.b, 7}, {f.a, f.r1, f.c, 9}});
  const auto s2 = rule_score(Query{f.a, f.r2, 10, {}}, rules, two, FusionConfig{});
  CHECK(s2.at(f.c) > s2.at(f.b));

  const auto base = recency_frequency_score(Query{f.a, f.r1, 8, {}}, kg, 0.1);
  CHECK(base.at(f.b) == doctest::Approx(0.904837).epsilon(1e-6));
  CHECK(recency_frequency_score(Query{f.a, f.r2, 8, {}}, kg, 0.1).empty());
  const auto twice = f.kg({{f.a, f.r1, f.b, 7}, {f.a, f.r1, f.b, 5}});
  CHECK(recency_frequency_score(Query{f.a, f.r1, 8, {}}, twice, 0.1).at(f.b) > base.at(f.b));
}

TEST_CASE("imported graph scores round trip") {
  Fixture f;
  TempDir dir;
  std::map<ImportedGraphScorer::Key, ScoreMap> table;
  table[{f.a, f.r1, 4}] = {{f.b, 0.1 + 0.2}, {f.c, -3.5e-7}};
  table[{f.b, inverse_of(f.r2), 9}] = {{f.a, 1.0 / 3.0}};
  export_graph_scores(dir / "g.jsonl", table, *f.catalogs);
  const auto scorer = import_graph_scores(dir / "g.jsonl", *f.catalogs);
  CHECK(scorer.table() == table);
  CHECK(scorer.score(Query{f.a, f.r1, 4, {}}) == table.at({f.a, f.r1, 4}));
  CHECK(scorer.score(Query{f.a, f.r1, 5, {}}).empty());

  testutil::write_file(dir / "bad.jsonl", R"({"subject":"a","relation":"r1","t":1,"scores":{}})" "\n"
                                          R"({"subject":"a","relation":"r1","t":2,"scores":{"zz":1}})" "\n");
  try {
    import_graph_scores(dir / "bad.jsonl", *f.catalogs);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("fusion worked value and zero fill") {
  const EntityId a{0}, b{1}, c{2};
  FusionConfig raw;
  raw.normalization = Normalization::None;
  const auto one = fuse({{a, 0.8}}, {{a, 0.5}}, raw);
  REQUIRE(one.size() == 1);
  CHECK(one[0].fused == 0.77);

  FusionConfig mm;
  const auto three = fuse({{a, 0.8}, {b, 1.0}, {c, 0.0}}, {{a, 0.5}, {b, 0.0}, {c, 1.0}}, mm);
  CHECK(three[0].entity == b);
  CHECK(three[1].entity == a);
  CHECK(three[1].fused == 0.77);

  const auto only_graph = fuse({{a, 2.0}, {b, 1.0}}, {{c, 4.0}, {a, 0.0}}, raw);
  REQUIRE(only_graph.size() == 3);
  for (const auto& s : only_graph) {
    if (s.entity == c) {
      CHECK(s.rule_score == 0.0);
      CHECK(s.fused == doctest::Approx(0.1 * 4.0));
    }
  }
  FusionConfig bad;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(fuse({}, {}, bad), ValidationError);
  CHECK(fuse({}, {}, mm).empty());
}

TEST_CASE("a constant side never reorders the other") {
  const ScoreMap rule{{EntityId{0}, 0.3}, {EntityId{1}, 0.9}, {EntityId{2}, 0.6}};
  const ScoreMap flat{{EntityId{0}, 2.0}, {EntityId{1}, 2.0}, {EntityId{2}, 2.0}};
  FusionConfig cfg;
  cfg.alpha = 0.4;
  CHECK(order(fuse(rule, flat, cfg)) == std::vector<EntityId>{EntityId{1}, EntityId{2}, EntityId{0}});
  const ScoreMap zeros{{EntityId{0}, 0.0}, {EntityId{1}, 0.0}};
  for (const auto& s : fuse(zeros, {}, cfg)) CHECK(s.fused == 0.0);
}

TEST_CASE("property: fusion endpoints reproduce single-side rankings") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    ScoreMap rule, graph;
    for (std::uint32_t e = 0; e < 12; ++e) {
      if (rng() % 3 == 0) rule[EntityId{e}] = std::floor(u(rng) * 2) / 2;
      if (rng() % 3 == 0) graph[EntityId{e}] = u(rng);
    }
    for (auto norm : {Normalization::MinMax, Normalization::None}) {
      FusionConfig cfg;
      cfg.normalization = norm;
      cfg.alpha = 1.0;
      CHECK(order(fuse(rule, graph, cfg)) == side_order(rule, graph));
      cfg.alpha = 0.0;
      CHECK(order(fuse(rule, graph, cfg)) == side_order(graph, rule));
    }
    FusionConfig cfg;
    CHECK(order(fuse(rule, graph, cfg)) == order(fuse(rule, graph, cfg)));
  }
}

TEST_CASE("reasoner ignores low-confidence rules and future edges") {
  Fixture f;
  const auto kg = f.kg({{f.a, f.r1, f.b, 3}, {f.a, f.r1, f.c, 8}});
  const std::vector<ScoredRule> rules{scored(Rule{f.r2, {f.r1}}, 0.5), scored(Rule{f.r2, {inverse_of(f.r1)}}, 0.005)};
  RecencyFrequencyScorer graph(kg, 0.1);
  const Reasoner reasoner(kg, rules, FusionConfig{}, &graph);
  CHECK(reasoner.rule_count() == 1);
  const auto ranked = reasoner.predict(Query{f.a, f.r2, 5, {}});
  REQUIRE(ranked.size() == 1);
  CHECK(ranked[0].entity == f.b);
  CHECK(reasoner.predict(Query{f.a, f.r2, 9, {}}).size() == 2);
}
