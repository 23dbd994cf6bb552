#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <tuple>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "llmda/dataset.hpp"
#include "llmda/reasoner.hpp"

namespace llmda {

/// Ranking metrics. An empty report (no queries) is flagged rather than zero.
struct EvalReport {
  double mrr = 0.0;
  std::map<int, double> hits;  // N -> Hit@N for N in {1, 3, 10}
  std::size_t queries = 0;
  /// Queries whose answer was not among the ranked candidates.
  std::size_t missed = 0;
  bool empty = true;
  /// Segment bounds, inclusive; unset for whole-split reports.
  std::optional<std::pair<Timestamp, Timestamp>> window;
};

inline constexpr int kHitLevels[] = {1, 3, 10};

/// Rank of `truth` once all other known-true entities are removed. When the
/// truth is absent the rank is `absent_rank` (|entity catalog| + 1 in reports).
std::size_t filtered_rank(std::span<const EntityId> ranked, EntityId truth,
                          std::span<const EntityId> known_true, std::size_t absent_rank);

/// MRR / Hit@N over 1-based ranks; `absent_rank` identifies missed queries, which
/// add 1/absent_rank to MRR and never count as hits.
EvalReport summarize_ranks(std::span<const std::size_t> ranks, std::size_t absent_rank = 0);

/// Time-aware filter: entities o with (s, r, o, t) anywhere in the dataset,
/// both directions.
class KnownFacts {
 public:
  explicit KnownFacts(const DatasetSplit& split);
  std::span<const EntityId> objects(EntityId s, RelationId r, Timestamp t) const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::tuple<EntityId, RelationId, Timestamp>& k) const noexcept;
  };
  std::unordered_map<std::tuple<EntityId, RelationId, Timestamp>, std::vector<EntityId>, KeyHash> map_;
};

/// Object queries plus subject queries through inverse relations, in input order.
std::vector<Query> make_queries(std::span<const Quadruple> quads, bool both_directions = true);

struct Prediction {
  Query query;
  std::vector<CandidateScore> ranked;
};

struct EvalConfig {
  std::size_t jobs = 1;
  /// Candidates kept per prediction.
  std::size_t top_n = 100;
  bool both_directions = true;
};

std::vector<Prediction> predict_all(const Reasoner& reasoner, std::span<const Query> queries,
                                    const EvalConfig& config);

EvalReport evaluate_predictions(std::span<const Prediction> predictions, const KnownFacts& known,
                                std::size_t num_entities);

EvalReport evaluate(std::span<const Quadruple> future, const Reasoner& reasoner, const KnownFacts& known,
                    std::size_t num_entities, const EvalConfig& config);

struct SegmentedReport {
  EvalReport overall;
  std::vector<EvalReport> segments;
};

/// Inclusive [begin, end] bounds of n contiguous segments of near-equal span over [lo, hi].
std::vector<std::pair<Timestamp, Timestamp>> segment_bounds(Timestamp lo, Timestamp hi, std::size_t n);

SegmentedReport segment_predictions(std::span<const Prediction> predictions, std::size_t n_segments,
                                    const KnownFacts& known, std::size_t num_entities);

SegmentedReport segment_eval(std::span<const Quadruple> future, std::size_t n_segments,
                             const Reasoner& reasoner, const KnownFacts& known,
                             std::size_t num_entities, const EvalConfig& config);

struct HorizonSpec {
  Timestamp delta_t = 1;
  std::size_t k_max = 1;
  void validate() const;
};

using ReasonerFactory = std::function<std::unique_ptr<Reasoner>(const TemporalKG& evidence)>;

struct HorizonOptions {
  /// Evidence stops at the end of the current split. Turning this off exposes
  /// future facts to the reasoner (leakage canary only).
  bool cap_evidence = true;
};

/// Report per k for queries with t in (B + (k-1) dT, B + k dT], B = end of the
/// current split. Windows without queries are flagged empty.
std::vector<EvalReport> horizon_eval(const HorizonSpec& spec, const Dataset& dataset,
                                     const ReasonerFactory& make_reasoner, const EvalConfig& config,
                                     const HorizonOptions& options = {});

/// Horizon reports from existing predictions; `boundary` is the last evidence timestamp.
std::vector<EvalReport> horizon_reports(std::span<const Prediction> predictions, const HorizonSpec& spec,
                                        Timestamp boundary, const KnownFacts& known,
                                        std::size_t num_entities);

/// Latest timestamp of the current split, or of the historical split when current is empty.
Timestamp evidence_boundary(const DatasetSplit& split);

/// Report document with metrics rounded to 4 decimals. `config_echo` must be a
/// JSON object text and is embedded under "config"; horizon reports go under "horizon".
std::string report_json(const SegmentedReport& report, std::string_view config_echo = "{}",
                        std::span<const EvalReport> horizon = {});
/// One row per segment, one per horizon window ("h1", "h2", ...) and an "all" row.
std::string report_tsv(const SegmentedReport& report, std::span<const EvalReport> horizon = {});

/// Prediction JSON Lines: {query: {subject, relation, t, object}, ranked: [{entity,
/// rule_score, graph_score, fused}]} with catalog names.
void write_predictions(const std::filesystem::path& path, std::span<const Prediction> predictions,
                       const Catalogs& catalogs);
std::vector<Prediction> read_predictions(const std::filesystem::path& path, const Catalogs& catalogs);

}  // namespace llmda
