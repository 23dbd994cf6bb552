#include <benchmark/benchmark.h>

#include <random>

#include "llmda/quality.hpp"
#include "llmda/reasoner.hpp"
#include "llmda/walk.hpp"

using namespace llmda;

namespace {

struct Kg {
  std::shared_ptr<Catalogs> catalogs = std::make_shared<Catalogs>();
  std::vector<Quadruple> quads;
  std::unique_ptr<TemporalKG> kg;

  Kg(std::size_t entities, std::size_t relations, std::size_t edges, Timestamp span) {
    for (std::size_t i = 0; i < entities; ++i) catalogs->entities.intern("e" + std::to_string(i));
    for (std::size_t i = 0; i < relations; ++i) catalogs->relations.intern("r" + std::to_string(i));
    std::mt19937_64 rng(1);
    while (quads.size() < edges) {
      const auto s = static_cast<std::uint32_t>(rng() % entities);
      const auto o = static_cast<std::uint32_t>(rng() % entities);
      if (s == o) continue;
      quads.push_back({EntityId{s}, RelationId{static_cast<std::uint32_t>(2 * (rng() % relations))}, EntityId{o},
                       static_cast<Timestamp>(rng() % span)});
    }
    kg = std::make_unique<TemporalKG>(build_kg(catalogs, quads, true));
  }
};

const Kg& medium() {
  static const Kg kg(500, 20, 20000, 365);
  return kg;
}

void BM_TransitionDistribution(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::vector<Timestamp> times(static_cast<std::size_t>(state.range(0)));
  for (auto& t : times) t = static_cast<Timestamp>(rng() % 1000);
  for (auto _ : state) benchmark::DoNotOptimize(transition_distribution(times, 1000, 0.1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TransitionDistribution)->Arg(8)->Arg(64)->Arg(1024);

void BM_SampleClosedPaths(benchmark::State& state) {
  const auto& kg = medium();
  WalkConfig cfg;
  cfg.walks_per_relation = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_closed_paths(*kg.kg, RelationId{0}, cfg));
}
BENCHMARK(BM_SampleClosedPaths)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Confidence(benchmark::State& state) {
  const auto& kg = medium();
  const Rule rule = state.range(0) == 1 ? Rule{RelationId{0}, {RelationId{2}}}
                                        : Rule{RelationId{0}, {RelationId{2}, RelationId{5}}};
  for (auto _ : state) benchmark::DoNotOptimize(confidence(rule, *kg.kg));
}
BENCHMARK(BM_Confidence)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ApplyRule(benchmark::State& state) {
  const auto& kg = medium();
  const Rule rule{RelationId{0}, {RelationId{2}, RelationId{5}, RelationId{4}}};
  std::uint32_t s = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_rule(rule, Query{EntityId{s}, RelationId{0}, 300, {}}, *kg.kg));
    s = (s + 1) % 500;
  }
}
BENCHMARK(BM_ApplyRule);

void BM_Fuse(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScoreMap rule, graph;
  for (std::uint32_t e = 0; e < static_cast<std::uint32_t>(state.range(0)); ++e) {
    if (e % 2 == 0) rule[EntityId{e}] = u(rng);
    if (e % 3 == 0) graph[EntityId{e}] = u(rng);
  }
  const FusionConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(fuse(rule, graph, cfg));
}
BENCHMARK(BM_Fuse)->Arg(100)->Arg(7000);

}  // namespace
BENCHMARK_MAIN();
