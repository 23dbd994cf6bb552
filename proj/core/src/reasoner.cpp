#include "llmda/reasoner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"

namespace llmda {

void FusionConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in [0, 1]");
  if (!(lambda > 0.0)) throw ValidationError("lambda must be > 0");
}

ScoreMap recency_frequency_score(const Query& query, const TemporalKG& evidence, double lambda) {
  ScoreMap out;
  const auto timeline = evidence.subject_relation_timeline(query.subject, query.relation);
  const auto edges = evidence.edges();
  auto end = std::lower_bound(timeline.begin(), timeline.end(), query.t,
                              [&](std::uint32_t p, Timestamp t) { return edges[p].t < t; });
  for (auto it = timeline.begin(); it != end; ++it) {
    const Edge& e = edges[*it];
    out[e.object] += std::exp(-lambda * static_cast<double>(query.t - e.t));
  }
  return out;
}

ScoreMap ImportedGraphScorer::score(const Query& query) const {
  auto it = table_.find({query.subject, query.relation, query.t});
  return it == table_.end() ? ScoreMap{} : it->second;
}

ImportedGraphScorer import_graph_scores(const std::filesystem::path& path, const Catalogs& catalogs) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::map<ImportedGraphScorer::Key, ScoreMap> table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto subj = catalogs.entities.find(j.at("subject").get<std::string>());
      const auto rel = catalogs.relations.find(j.at("relation").get<std::string>());
      if (!subj || !rel) throw ParseError(path.string(), lineno, "unknown subject or relation");
      ScoreMap scores;
      for (const auto& [name, value] : j.at("scores").items()) {
        const auto e = catalogs.entities.find(name);
        if (!e) throw ParseError(path.string(), lineno, "unknown entity '" + name + "'");
        const double v = value.get<double>();
        if (!std::isfinite(v)) throw ParseError(path.string(), lineno, "non-finite score");
        scores[*e] = v;
      }
      table[{*subj, *rel, j.at("t").get<Timestamp>()}] = std::move(scores);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
  return ImportedGraphScorer(std::move(table));
}

void export_graph_scores(const std::filesystem::path& path,
                         const std::map<ImportedGraphScorer::Key, ScoreMap>& table,
                         const Catalogs& catalogs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [key, scores] : table) {
    nlohmann::ordered_json j;
    j["subject"] = catalogs.entities.name(std::get<0>(key));
    j["relation"] = catalogs.relations.name(std::get<1>(key));
    j["t"] = std::get<2>(key);
    nlohmann::ordered_json s = nlohmann::ordered_json::object();
    for (const auto& [e, v] : scores) s[catalogs.entities.name(e)] = v;
    j["scores"] = std::move(s);
    out << j.dump() << '\n';
  }
}

std::vector<ScoredRule> select_high_confidence(std::span<const ScoredRule> rules, double gamma) {
  std::vector<ScoredRule> out;
  for (const ScoredRule& r : rules) {
    if (r.confidence > gamma) out.push_back(r);
  }
  return out;
}

ApplyResult apply_rule(const Rule& rule, const Query& query, const TemporalKG& evidence,
                       std::size_t fanout_cap, bool strict_within_body) {
  if (rule.head != query.relation) throw ValidationError("rule head does not match the query relation");
  ApplyResult result;
  const std::size_t k = rule.body.size();
  if (k == 0) return result;
  const auto edges = evidence.edges();
  std::vector<Timestamp> times(k);
  std::set<std::pair<EntityId, std::vector<Timestamp>>> seen;

  auto extend = [&](auto&& self, EntityId node, std::size_t depth) -> void {
    if (depth == k) {
      if (seen.emplace(node, times).second) result.matches.push_back({node, times.back()});
      return;
    }
    const auto timeline = evidence.subject_relation_timeline(node, rule.body[depth]);
    auto before = [&](std::uint32_t p, Timestamp t) { return edges[p].t < t; };
    auto first = timeline.begin();
    if (depth > 0) {
      const Timestamp prev = times[depth - 1];
      first = strict_within_body
                  ? std::upper_bound(timeline.begin(), timeline.end(), prev,
                                     [&](Timestamp t, std::uint32_t p) { return t < edges[p].t; })
                  : std::lower_bound(timeline.begin(), timeline.end(), prev, before);
    }
    const auto last = std::lower_bound(first, timeline.end(), query.t, before);
    std::size_t taken = 0;
    for (auto it = last; it != first;) {
      --it;
      if (taken == fanout_cap) {
        result.truncated = true;
        break;
      }
      ++taken;
      const Edge& e = edges[*it];
      if (e.t >= query.t) throw LeakageError("rule application read an edge at or after the query time");
      times[depth] = e.t;
      self(self, e.object, depth + 1);
    }
  };
  extend(extend, query.subject, 0);

  std::sort(result.matches.begin(), result.matches.end(), [](const RuleMatch& a, const RuleMatch& b) {
    return std::tie(a.candidate, a.latest_body_time) < std::tie(b.candidate, b.latest_body_time);
  });
  return result;
}

ScoreMap rule_score(const Query& query, std::span<const ScoredRule> rules, const TemporalKG& evidence,
                    const FusionConfig& config) {
  ScoreMap out;
  for (const ScoredRule& r : rules) {
    if (r.rule.head != query.relation) continue;
    const auto applied =
        apply_rule(r.rule, query, evidence, config.fanout_cap, config.strict_within_body);
    for (const RuleMatch& m : applied.matches) {
      out[m.candidate] +=
          r.confidence + std::exp(-config.lambda * static_cast<double>(query.t - m.latest_body_time));
    }
  }
  return out;
}

namespace {

struct Scale {
  double lo = 0.0;
  double span = 0.0;
  bool constant = true;

  double apply(double x) const {
    if (!constant) return (x - lo) / span;
    return lo > 0.0 ? 1.0 : 0.0;
  }
};

Scale fit_scale(const std::vector<double>& xs) {
  Scale s;
  if (xs.empty()) return s;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  s.lo = *lo;
  s.span = *hi - *lo;
  s.constant = !(s.span > 0.0);
  return s;
}

}  // namespace

std::vector<CandidateScore> fuse(const ScoreMap& rule_scores, const ScoreMap& graph_scores,
                                 const FusionConfig& config) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  std::vector<CandidateScore> out;
  {
    auto r = rule_scores.begin();
    auto g = graph_scores.begin();
    while (r != rule_scores.end() || g != graph_scores.end()) {
      CandidateScore c;
      if (g == graph_scores.end() || (r != rule_scores.end() && r->first < g->first)) {
        c = {r->first, r->second, 0.0, 0.0};
        ++r;
      } else if (r == rule_scores.end() || g->first < r->first) {
        c = {g->first, 0.0, g->second, 0.0};
        ++g;
      } else {
        c = {r->first, r->second, g->second, 0.0};
        ++r;
        ++g;
      }
      out.push_back(c);
    }
  }
  std::vector<double> rs;
  std::vector<double> gs;
  rs.reserve(out.size());
  gs.reserve(out.size());
  for (const auto& c : out) {
    rs.push_back(c.rule_score);
    gs.push_back(c.graph_score);
  }
  const bool minmax = config.normalization == Normalization::MinMax;
  const Scale rscale = fit_scale(rs);
  const Scale gscale = fit_scale(gs);
  for (auto& c : out) {
    const double rn = minmax ? rscale.apply(c.rule_score) : c.rule_score;
    const double gn = minmax ? gscale.apply(c.graph_score) : c.graph_score;
    c.fused = config.alpha * rn + (1.0 - config.alpha) * gn;
  }
  std::sort(out.begin(), out.end(), [](const CandidateScore& a, const CandidateScore& b) {
    if (a.fused != b.fused) return a.fused > b.fused;
    return a.entity < b.entity;
  });
  return out;
}

Reasoner::Reasoner(const TemporalKG& evidence, std::span<const ScoredRule> adapted,
                   FusionConfig config, const GraphScorer* graph)
    : evidence_(evidence), config_(config), graph_(graph) {
  config_.validate();
  for (ScoredRule& r : select_high_confidence(adapted, config_.gamma)) {
    by_head_[r.rule.head].push_back(std::move(r));
    ++rule_count_;
  }
}

ScoreMap Reasoner::rule_scores(const Query& query) const {
  auto it = by_head_.find(query.relation);
  if (it == by_head_.end()) return {};
  return rule_score(query, it->second, evidence_, config_);
}

std::vector<CandidateScore> Reasoner::predict(const Query& query) const {
  const ScoreMap graph = graph_ ? graph_->score(query) : ScoreMap{};
  return fuse(rule_scores(query), graph, config_);
}

}  // namespace llmda
