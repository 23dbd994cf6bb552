#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "llmda/rule.hpp"
#include "llmda/tkg.hpp"

namespace llmda {

/// Object query (subject, relation, ?, t); `object` holds the answer when known.
struct Query {
  EntityId subject{};
  RelationId relation{};
  Timestamp t = 0;
  std::optional<EntityId> object;
};

using ScoreMap = std::map<EntityId, double>;

class GraphScorer {
 public:
  virtual ~GraphScorer() = default;
  virtual ScoreMap score(const Query& query) const = 0;
  virtual std::string id() const = 0;
};

/// score(e) = sum over past edges (s, r, e, t < t_q) of exp(-lambda (t_q - t)).
ScoreMap recency_frequency_score(const Query& query, const TemporalKG& evidence, double lambda);

class RecencyFrequencyScorer final : public GraphScorer {
 public:
  RecencyFrequencyScorer(const TemporalKG& evidence, double lambda)
      : evidence_(evidence), lambda_(lambda) {}
  ScoreMap score(const Query& query) const override {
    return recency_frequency_score(query, evidence_, lambda_);
  }
  std::string id() const override { return "recency-frequency"; }

 private:
  const TemporalKG& evidence_;
  double lambda_;
};

/// Scores precomputed by an external model, keyed by (subject, relation, t).
class ImportedGraphScorer final : public GraphScorer {
 public:
  using Key = std::tuple<EntityId, RelationId, Timestamp>;

  explicit ImportedGraphScorer(std::map<Key, ScoreMap> table) : table_(std::move(table)) {}
  ScoreMap score(const Query& query) const override;
  std::string id() const override { return "imported"; }
  const std::map<Key, ScoreMap>& table() const noexcept { return table_; }

 private:
  std::map<Key, ScoreMap> table_;
};

/// JSON Lines of {subject, relation, t, scores: {entity: value}} using catalog names.
/// Throws ParseError (with line number) on malformed records or unknown names.
ImportedGraphScorer import_graph_scores(const std::filesystem::path& path, const Catalogs& catalogs);
void export_graph_scores(const std::filesystem::path& path,
                         const std::map<ImportedGraphScorer::Key, ScoreMap>& table,
                         const Catalogs& catalogs);

enum class Normalization { MinMax, None };

struct FusionConfig {
  double alpha = 0.9;
  double gamma = 0.01;
  double lambda = 0.1;
  Normalization normalization = Normalization::MinMax;
  std::size_t fanout_cap = 1000;
  bool strict_within_body = false;

  void validate() const;
};

/// {rho | c_rho > gamma}, input order kept.
std::vector<ScoredRule> select_high_confidence(std::span<const ScoredRule> rules, double gamma);

struct RuleMatch {
  EntityId candidate{};
  Timestamp latest_body_time = 0;
};

struct ApplyResult {
  std::vector<RuleMatch> matches;
  bool truncated = false;
};

/// Body chains from the query subject with non-decreasing times, all before the
/// query time. One match per distinct (candidate, body timestamps); sorted.
/// Throws ValidationError if the rule head is not the query relation.
ApplyResult apply_rule(const Rule& rule, const Query& query, const TemporalKG& evidence,
                       std::size_t fanout_cap = 1000, bool strict_within_body = false);

/// Sum over rules and matched groundings of c_rho + exp(-lambda (t_q - t_o)).
ScoreMap rule_score(const Query& query, std::span<const ScoredRule> rules, const TemporalKG& evidence,
                    const FusionConfig& config);

struct CandidateScore {
  EntityId entity{};
  double rule_score = 0.0;
  double graph_score = 0.0;
  double fused = 0.0;
};

/// Union of candidates, missing side zero-filled, each side normalized per the
/// config, fused = alpha * rule + (1 - alpha) * graph. Sorted by fused
/// descending, ties by ascending entity id.
std::vector<CandidateScore> fuse(const ScoreMap& rule_scores, const ScoreMap& graph_scores,
                                 const FusionConfig& config);

/// Rule-based plus optional graph-based scoring over a fixed evidence KG.
class Reasoner {
 public:
  Reasoner(const TemporalKG& evidence, std::span<const ScoredRule> adapted, FusionConfig config,
           const GraphScorer* graph = nullptr);

  std::vector<CandidateScore> predict(const Query& query) const;
  ScoreMap rule_scores(const Query& query) const;
  const TemporalKG& evidence() const noexcept { return evidence_; }
  std::size_t rule_count() const noexcept { return rule_count_; }

 private:
  const TemporalKG& evidence_;
  FusionConfig config_;
  const GraphScorer* graph_;
  std::map<RelationId, std::vector<ScoredRule>> by_head_;
  std::size_t rule_count_ = 0;
};

}  // namespace llmda
