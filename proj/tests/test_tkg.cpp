#include <algorithm>
#include <random>

#include "doctest.h"
#include "llmda/dataset.hpp"
#include "llmda/tkg.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace llmda;
using testutil::TempDir;
using testutil::write_file;

namespace {

std::shared_ptr<Catalogs> tiny_catalogs() {
  auto c = std::make_shared<Catalogs>();
  for (const char* e : {"a", "b", "c", "d"}) c->entities.intern(e);
  c->relations.intern("r");
  c->relations.intern("s");
  return c;
}

const RelationId kR = RelationCatalog::forward_id(0);
const RelationId kS = RelationCatalog::forward_id(1);

}  // namespace

TEST_CASE("three-line file loads three quadruples over three entities") {
  TempDir dir;
  write_file(dir / "q.tsv", "a\tr\tb\t0\na\tr\tc\t1\nb\tr\ta\t1\n");
  Catalogs c;
  const auto quads = load_quadruples(dir / "q.tsv", c);
  CHECK(quads.size() == 3);
  CHECK(c.entities.size() == 3);
  CHECK(c.relations.forward_count() == 1);
  CHECK(quads[2] == Quadruple{*c.entities.find("b"), kR, *c.entities.find("a"), 1});
}

TEST_CASE("empty file gives empty list and catalogs") {
  TempDir dir;
  write_file(dir / "q.tsv", "");
  Catalogs c;
  CHECK(load_quadruples(dir / "q.tsv", c).empty());
  CHECK(c.entities.size() == 0);
  CHECK(c.relations.size() == 0);
}

TEST_CASE("malformed lines report their line number") {
  TempDir dir;
  Catalogs c;
  write_file(dir / "q.tsv", "a\tr\tb\t0\na\tr\tb\n");
  try {
    load_quadruples(dir / "q.tsv", c);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  write_file(dir / "bad_time.tsv", "a\tr\tb\tyesterday\n");
  CHECK_THROWS_AS(load_quadruples(dir / "bad_time.tsv", c), ParseError);
}

TEST_CASE("ISO dates become day offsets from the earliest date") {
  TempDir dir;
  write_file(dir / "q.tsv", "a\tMake statement\tb\t2014-01-03\nb\tMake statement\ta\t2014-01-01\n");
  Catalogs c;
  const auto quads = load_quadruples(dir / "q.tsv", c);
  CHECK(quads[0].t == 2);
  CHECK(quads[1].t == 0);
  CHECK(c.relations.find("Make_statement") == c.relations.find("Make statement"));
  CHECK(c.relations.find("inv_Make_statement") == inverse_of(*c.relations.find("Make statement")));
  CHECK(c.relations.display_name(RelationCatalog::forward_id(0)) == "Make_statement");
}

TEST_CASE("strict id maps reject unknown names") {
  TempDir dir;
  write_file(dir / "e.txt", "a\t0\nb\t1\n");
  write_file(dir / "r.txt", "r\t0\n");
  write_file(dir / "q.tsv", "a\tr\tz\t0\n");
  Catalogs c;
  load_id_maps(c, dir / "e.txt", dir / "r.txt");
  CHECK_THROWS_AS(load_quadruples(dir / "q.tsv", c, {.strict = true}), ResolutionError);
}

TEST_CASE("splits must be chronological") {
  TempDir dir;
  write_file(dir / "h.tsv", "a\tr\tb\t5\n");
  write_file(dir / "c.tsv", "a\tr\tb\t3\n");
  write_file(dir / "f.tsv", "a\tr\tb\t6\n");
  CHECK_THROWS_AS(load_dataset({dir / "h.tsv", dir / "c.tsv", dir / "f.tsv", {}, {}}), ValidationError);
}

TEST_CASE("inverse augmentation doubles edges") {
  auto c = tiny_catalogs();
  const std::vector<Quadruple> one{{EntityId{0}, kR, EntityId{1}, 4}};
  const auto with = build_kg(c, one, true);
  CHECK(with.edge_count() == 2);
  CHECK(with.relations_present().size() == 2);
  const auto without = build_kg(c, one, false);
  CHECK(without.edge_count() == 1);
  CHECK(without.relations_present().size() == 1);
}

TEST_CASE("neighbors_before filters by time and sorts most recent first") {
  auto c = tiny_catalogs();
  const EntityId a{0}, b{1};
  const std::vector<Quadruple> q{{a, kR, b, 3}, {a, kR, b, 7}, {a, kS, b, 5}};
  const auto kg = build_kg(c, q, false);
  const auto strict = neighbors_before(kg, a, 5, true);
  REQUIRE(strict.size() == 1);
  CHECK(strict[0].t == 3);
  const auto loose = neighbors_before(kg, a, 5, false);
  REQUIRE(loose.size() == 2);
  CHECK(loose[0].t == 5);
  CHECK(loose[1].t == 3);
  CHECK(neighbors_before(kg, b, 10, true).empty());
  CHECK_THROWS_AS(neighbors_before(kg, EntityId{99}, 10, true), LookupError);
}

TEST_CASE("stats document") {
  auto c = tiny_catalogs();
  const std::vector<Quadruple> q{{EntityId{0}, kR, EntityId{1}, 3}, {EntityId{1}, kS, EntityId{2}, 9}};
  CHECK(kg_stats_json(build_kg(c, q, false).stats()) ==
        R"({"entities":4,"relations":2,"edges":2,"min_t":3,"max_t":9})");
}

TEST_CASE("property: write then load reproduces the edge multiset") {
  std::mt19937_64 rng(11);
  TempDir dir;
  for (int trial = 0; trial < 50; ++trial) {
    auto kg = oracle::random_kg(rng, 30);
    Catalogs c;
    c.relations = kg.relations;
    for (std::size_t i = 0; i < kg.entities; ++i) c.entities.intern("e" + std::to_string(i));
    write_quadruples(dir / "q.tsv", kg.quads, c);
    write_id_maps(dir / "e.txt", dir / "r.txt", c);
    Catalogs back;
    load_id_maps(back, dir / "e.txt", dir / "r.txt");
    auto loaded = load_quadruples(dir / "q.tsv", back, {.strict = true});
    auto expected = kg.quads;
    std::sort(expected.begin(), expected.end());
    std::sort(loaded.begin(), loaded.end());
    CHECK(loaded == expected);
  }
}

TEST_CASE("property: indices are coherent and inverses pair up") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto rk = oracle::random_kg(rng, 25);
    auto c = std::make_shared<Catalogs>();
    c->relations = rk.relations;
    for (std::size_t i = 0; i < rk.entities; ++i) c->entities.intern("e" + std::to_string(i));
    const auto kg = build_kg(c, rk.quads, true);
    REQUIRE(kg.edge_count() == 2 * rk.quads.size());

    std::vector<int> seen_subject(kg.edge_count()), seen_relation(kg.edge_count()), seen_time(kg.edge_count());
    for (std::uint32_t e = 0; e < rk.entities; ++e) {
      for (auto pos : kg.by_subject(EntityId{e})) {
        CHECK(kg.edge(pos).subject == EntityId{e});
        ++seen_subject[pos];
      }
      Timestamp last = std::numeric_limits<Timestamp>::min();
      for (auto pos : kg.subject_timeline(EntityId{e})) {
        CHECK(kg.edge(pos).subject == EntityId{e});
        CHECK(kg.edge(pos).t >= last);
        last = kg.edge(pos).t;
        ++seen_time[pos];
      }
    }
    for (RelationId r : c->relations.all()) {
      for (auto pos : kg.by_relation(r)) {
        CHECK(kg.edge(pos).relation == r);
        ++seen_relation[pos];
      }
    }
    for (std::size_t i = 0; i < kg.edge_count(); ++i) {
      CHECK(seen_subject[i] == 1);
      CHECK(seen_relation[i] == 1);
      CHECK(seen_time[i] == 1);
    }

    std::multiset<Quadruple> all(kg.edges().begin(), kg.edges().end());
    for (const auto& e : kg.edges()) {
      CHECK(inverse_of(inverse_of(e.relation)) == e.relation);
      CHECK(all.count({e.object, inverse_of(e.relation), e.subject, e.t}) == all.count(e));
    }

    for (std::uint32_t e = 0; e < rk.entities; ++e) {
      for (Timestamp t = 0; t <= 9; ++t) {
        const auto strict = neighbors_before(kg, EntityId{e}, t, true);
        const auto loose = neighbors_before(kg, EntityId{e}, t, false);
        std::multiset<Quadruple> ls(loose.begin(), loose.end());
        for (const auto& s : strict) CHECK(ls.count(s) > 0);
        for (const auto& l : loose) {
          if (l.t != t) CHECK(std::count(strict.begin(), strict.end(), l) == std::count(loose.begin(), loose.end(), l));
        }
      }
    }
  }
}

TEST_CASE("relation name normalization") {
  CHECK(normalize_relation_name("Make a visit") == "Make_a_visit");
  CHECK(normalize_relation_name("Engage_in_diplomatic_ cooperation") == "Engage_in_diplomatic_cooperation");
  CHECK(normalize_relation_name("Appeal for diplomatic cooperation (such as policy support)") ==
        "Appeal_for_diplomatic_cooperation_(such_as_policy_support)");
}
