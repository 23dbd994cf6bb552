#include "llmda/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "llmda/parallel.hpp"

namespace llmda {

std::size_t filtered_rank(std::span<const EntityId> ranked, EntityId truth,
                          std::span<const EntityId> known_true, std::size_t absent_rank) {
  std::size_t rank = 1;
  for (EntityId e : ranked) {
    if (e == truth) return rank;
    if (std::find(known_true.begin(), known_true.end(), e) != known_true.end()) continue;
    ++rank;
  }
  return absent_rank;
}

EvalReport summarize_ranks(std::span<const std::size_t> ranks, std::size_t absent_rank) {
  EvalReport r;
  r.queries = ranks.size();
  r.empty = ranks.empty();
  for (int n : kHitLevels) r.hits[n] = 0.0;
  if (ranks.empty()) return r;
  double rr = 0.0;
  std::map<int, std::size_t> hit_counts;
  for (std::size_t rank : ranks) {
    rr += 1.0 / static_cast<double>(rank);
    if (absent_rank != 0 && rank == absent_rank) {
      ++r.missed;
      continue;
    }
    for (int n : kHitLevels) {
      if (rank <= static_cast<std::size_t>(n)) ++hit_counts[n];
    }
  }
  const double q = static_cast<double>(ranks.size());
  r.mrr = rr / q;
  for (int n : kHitLevels) r.hits[n] = static_cast<double>(hit_counts[n]) / q;
  return r;
}

std::size_t KnownFacts::KeyHash::operator()(
    const std::tuple<EntityId, RelationId, Timestamp>& k) const noexcept {
  return std::hash<Quadruple>{}({std::get<0>(k), std::get<1>(k), EntityId{0}, std::get<2>(k)});
}

KnownFacts::KnownFacts(const DatasetSplit& split) {
  for (const auto* part : {&split.historical, &split.current, &split.future}) {
    for (const Quadruple& q : *part) {
      auto& fwd = map_[{q.subject, q.relation, q.t}];
      if (std::find(fwd.begin(), fwd.end(), q.object) == fwd.end()) fwd.push_back(q.object);
      auto& inv = map_[{q.object, inverse_of(q.relation), q.t}];
      if (std::find(inv.begin(), inv.end(), q.subject) == inv.end()) inv.push_back(q.subject);
    }
  }
}

std::span<const EntityId> KnownFacts::objects(EntityId s, RelationId r, Timestamp t) const {
  auto it = map_.find({s, r, t});
  if (it == map_.end()) return {};
  return it->second;
}

std::vector<Query> make_queries(std::span<const Quadruple> quads, bool both_directions) {
  std::vector<Query> out;
  out.reserve(quads.size() * (both_directions ? 2 : 1));
  for (const Quadruple& q : quads) {
    out.push_back({q.subject, q.relation, q.t, q.object});
    if (both_directions) out.push_back({q.object, inverse_of(q.relation), q.t, q.subject});
  }
  return out;
}

std::vector<Prediction> predict_all(const Reasoner& reasoner, std::span<const Query> queries,
                                    const EvalConfig& config) {
  std::vector<Prediction> out(queries.size());
  parallel_for(queries.size(), config.jobs, [&](std::size_t i) {
    out[i].query = queries[i];
    out[i].ranked = reasoner.predict(queries[i]);
    if (out[i].ranked.size() > config.top_n) out[i].ranked.resize(config.top_n);
  });
  return out;
}

namespace {

std::size_t rank_of(const Prediction& p, const KnownFacts& known, std::size_t absent_rank) {
  if (!p.query.object) throw ValidationError("prediction has no ground-truth answer");
  std::vector<EntityId> ranked;
  ranked.reserve(p.ranked.size());
  for (const auto& c : p.ranked) ranked.push_back(c.entity);
  return filtered_rank(ranked, *p.query.object, known.objects(p.query.subject, p.query.relation, p.query.t),
                       absent_rank);
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  if (r.window) {
    j["t_begin"] = r.window->first;
    j["t_end"] = r.window->second;
  }
  j["queries"] = r.queries;
  j["missed"] = r.missed;
  j["empty"] = r.empty;
  if (r.empty) {
    j["mrr"] = nullptr;
    for (int n : kHitLevels) j["hits@" + std::to_string(n)] = nullptr;
  } else {
    j["mrr"] = round4(r.mrr);
    for (int n : kHitLevels) j["hits@" + std::to_string(n)] = round4(r.hits.at(n));
  }
  return j;
}

}  // namespace

EvalReport evaluate_predictions(std::span<const Prediction> predictions, const KnownFacts& known,
                                std::size_t num_entities) {
  const std::size_t absent = num_entities + 1;
  std::vector<std::size_t> ranks;
  ranks.reserve(predictions.size());
  for (const Prediction& p : predictions) ranks.push_back(rank_of(p, known, absent));
  return summarize_ranks(ranks, absent);
}

EvalReport evaluate(std::span<const Quadruple> future, const Reasoner& reasoner, const KnownFacts& known,
                    std::size_t num_entities, const EvalConfig& config) {
  const auto queries = make_queries(future, config.both_directions);
  const auto predictions = predict_all(reasoner, queries, config);
  return evaluate_predictions(predictions, known, num_entities);
}

std::vector<std::pair<Timestamp, Timestamp>> segment_bounds(Timestamp lo, Timestamp hi, std::size_t n) {
  if (n == 0) throw ValidationError("n_segments must be >= 1");
  std::vector<std::pair<Timestamp, Timestamp>> out;
  if (hi < lo) return out;
  const Timestamp span = hi - lo + 1;
  const auto nn = static_cast<Timestamp>(n);
  for (Timestamp i = 0; i < nn; ++i) {
    const Timestamp begin = lo + (i * span) / nn;
    const Timestamp end = lo + ((i + 1) * span) / nn - 1;
    out.emplace_back(begin, end);
  }
  return out;
}

SegmentedReport segment_predictions(std::span<const Prediction> predictions, std::size_t n_segments,
                                    const KnownFacts& known, std::size_t num_entities) {
  SegmentedReport out;
  out.overall = evaluate_predictions(predictions, known, num_entities);
  if (predictions.empty()) {
    segment_bounds(0, 0, n_segments);
    return out;
  }
  Timestamp lo = std::numeric_limits<Timestamp>::max();
  Timestamp hi = std::numeric_limits<Timestamp>::min();
  for (const auto& p : predictions) {
    lo = std::min(lo, p.query.t);
    hi = std::max(hi, p.query.t);
  }
  for (const auto& [b, e] : segment_bounds(lo, hi, n_segments)) {
    std::vector<Prediction> part;
    for (const auto& p : predictions) {
      if (p.query.t >= b && p.query.t <= e) part.push_back(p);
    }
    EvalReport r = evaluate_predictions(part, known, num_entities);
    r.window = std::make_pair(b, e);
    out.segments.push_back(std::move(r));
  }
  return out;
}

SegmentedReport segment_eval(std::span<const Quadruple> future, std::size_t n_segments,
                             const Reasoner& reasoner, const KnownFacts& known,
                             std::size_t num_entities, const EvalConfig& config) {
  const auto queries = make_queries(future, config.both_directions);
  const auto predictions = predict_all(reasoner, queries, config);
  return segment_predictions(predictions, n_segments, known, num_entities);
}

void HorizonSpec::validate() const {
  if (delta_t < 1) throw ValidationError("delta_t must be >= 1");
  if (k_max < 1) throw ValidationError("k must be >= 1");
}

Timestamp evidence_boundary(const DatasetSplit& split) {
  Timestamp boundary = std::numeric_limits<Timestamp>::min();
  for (const auto* part : {&split.historical, &split.current}) {
    for (const auto& q : *part) boundary = std::max(boundary, q.t);
  }
  return boundary;
}

std::vector<EvalReport> horizon_reports(std::span<const Prediction> predictions, const HorizonSpec& spec,
                                        Timestamp boundary, const KnownFacts& known,
                                        std::size_t num_entities) {
  spec.validate();
  std::vector<EvalReport> out;
  for (std::size_t k = 1; k <= spec.k_max; ++k) {
    const Timestamp begin = boundary + static_cast<Timestamp>(k - 1) * spec.delta_t + 1;
    const Timestamp end = boundary + static_cast<Timestamp>(k) * spec.delta_t;
    std::vector<Prediction> window;
    for (const auto& p : predictions) {
      if (p.query.t >= begin && p.query.t <= end) window.push_back(p);
    }
    EvalReport r = evaluate_predictions(window, known, num_entities);
    r.window = std::make_pair(begin, end);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EvalReport> horizon_eval(const HorizonSpec& spec, const Dataset& dataset,
                                     const ReasonerFactory& make_reasoner, const EvalConfig& config,
                                     const HorizonOptions& options) {
  spec.validate();
  const DatasetSplit& split = dataset.split;
  const Timestamp boundary = evidence_boundary(split);
  std::vector<Quadruple> evidence_quads = split.historical;
  evidence_quads.insert(evidence_quads.end(), split.current.begin(), split.current.end());
  if (!options.cap_evidence) {
    evidence_quads.insert(evidence_quads.end(), split.future.begin(), split.future.end());
  }
  const TemporalKG evidence = build_kg(dataset.catalogs, evidence_quads, true);
  const auto reasoner = make_reasoner(evidence);

  const Timestamp last = boundary + static_cast<Timestamp>(spec.k_max) * spec.delta_t;
  std::vector<Quadruple> in_range;
  for (const auto& q : split.future) {
    if (q.t > boundary && q.t <= last) in_range.push_back(q);
  }
  const auto queries = make_queries(in_range, config.both_directions);
  const auto predictions = predict_all(*reasoner, queries, config);
  return horizon_reports(predictions, spec, boundary, KnownFacts(split), dataset.catalogs->entities.size());
}

std::string report_json(const SegmentedReport& report, std::string_view config_echo,
                        std::span<const EvalReport> horizon) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(config_echo);
  auto overall = report_to_json(report.overall);
  for (auto it = overall.begin(); it != overall.end(); ++it) j[it.key()] = it.value();
  auto segs = nlohmann::ordered_json::array();
  for (const auto& s : report.segments) segs.push_back(report_to_json(s));
  j["segments"] = std::move(segs);
  if (!horizon.empty()) {
    auto h = nlohmann::ordered_json::array();
    for (const auto& r : horizon) h.push_back(report_to_json(r));
    j["horizon"] = std::move(h);
  }
  return j.dump(2) + "\n";
}

std::string report_tsv(const SegmentedReport& report, std::span<const EvalReport> horizon) {
  std::ostringstream out;
  out << "segment\tt_begin\tt_end\tqueries\tmissed\tmrr\thits@1\thits@3\thits@10\n";
  auto row = [&](const std::string& name, const EvalReport& r) {
    out << name << '\t';
    if (r.window) out << r.window->first << '\t' << r.window->second;
    else out << "\t";
    out << '\t' << r.queries << '\t' << r.missed;
    if (r.empty) {
      out << "\t\t\t\t\n";
      return;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "\t%.4f", r.mrr);
    out << buf;
    for (int n : kHitLevels) {
      std::snprintf(buf, sizeof buf, "\t%.4f", r.hits.at(n));
      out << buf;
    }
    out << '\n';
  };
  for (std::size_t i = 0; i < report.segments.size(); ++i) row(std::to_string(i), report.segments[i]);
  for (std::size_t i = 0; i < horizon.size(); ++i) row("h" + std::to_string(i + 1), horizon[i]);
  row("all", report.overall);
  return out.str();
}

void write_predictions(const std::filesystem::path& path, std::span<const Prediction> predictions,
                       const Catalogs& catalogs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const Prediction& p : predictions) {
    nlohmann::ordered_json q;
    q["subject"] = catalogs.entities.name(p.query.subject);
    q["relation"] = catalogs.relations.name(p.query.relation);
    q["t"] = p.query.t;
    if (p.query.object) q["object"] = catalogs.entities.name(*p.query.object);
    auto ranked = nlohmann::ordered_json::array();
    for (const auto& c : p.ranked) {
      ranked.push_back({{"entity", catalogs.entities.name(c.entity)},
                        {"rule_score", c.rule_score},
                        {"graph_score", c.graph_score},
                        {"fused", c.fused}});
    }
    nlohmann::ordered_json j;
    j["query"] = std::move(q);
    j["ranked"] = std::move(ranked);
    out << j.dump() << '\n';
  }
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path, const Catalogs& catalogs) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  auto entity = [&](const std::string& name) {
    auto e = catalogs.entities.find(name);
    if (!e) throw ParseError(path.string(), lineno, "unknown entity '" + name + "'");
    return *e;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Prediction p;
      const auto& q = j.at("query");
      p.query.subject = entity(q.at("subject").get<std::string>());
      const auto rel = catalogs.relations.find(q.at("relation").get<std::string>());
      if (!rel) throw ParseError(path.string(), lineno, "unknown relation");
      p.query.relation = *rel;
      p.query.t = q.at("t").get<Timestamp>();
      if (q.contains("object")) p.query.object = entity(q.at("object").get<std::string>());
      for (const auto& c : j.at("ranked")) {
        p.ranked.push_back({entity(c.at("entity").get<std::string>()), c.at("rule_score").get<double>(),
                            c.at("graph_score").get<double>(), c.at("fused").get<double>()});
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
  return out;
}

}  // namespace llmda
