#include "stages.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>

#include "llmda/dataset.hpp"
#include "llmda/eval.hpp"
#include "llmda/hash.hpp"
#include "llmda/http_clients.hpp"
#include "llmda/random.hpp"

namespace llmda::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kHistorical = "historical.tsv";
constexpr const char* kCurrent = "current.tsv";
constexpr const char* kFuture = "future.tsv";
constexpr const char* kEntityIds = "entity2id.txt";
constexpr const char* kRelationIds = "relation2id.txt";
constexpr const char* kStats = "kg_stats.json";
constexpr const char* kSampled = "rules_sampled.jsonl";
constexpr const char* kGenerated = "rules_generated.jsonl";
constexpr const char* kGenerationLog = "generation_log.json";
constexpr const char* kAdapted = "rules_adapted.jsonl";
constexpr const char* kAdaptationLog = "adaptation_log.json";
constexpr const char* kTranscript = "transcript.jsonl";
constexpr const char* kPredictions = "predictions.jsonl";
constexpr const char* kReportJson = "report.json";
constexpr const char* kReportTsv = "report.tsv";

using Clock = std::chrono::steady_clock;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::ostream& log(const RunContext& ctx, const std::string& stage) {
  static std::ofstream null_stream;
  if (!ctx.log) return null_stream;
  return *ctx.log << "[" << stage << "] ";
}

void require_input(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) throw DependencyError(path, producer);
}

Dataset load_workdir_dataset(const RunContext& ctx) {
  const fs::path& w = ctx.workdir;
  for (const char* name : {kHistorical, kCurrent, kFuture, kEntityIds, kRelationIds}) {
    require_input(w / name, "ingest");
  }
  return load_dataset({w / kHistorical, w / kCurrent, w / kFuture, w / kEntityIds, w / kRelationIds});
}

std::vector<Quadruple> concat(std::span<const Quadruple> a, std::span<const Quadruple> b) {
  std::vector<Quadruple> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

/// Records inputs, outputs and timing for one stage run.
class Manifest {
 public:
  Manifest(const RunContext& ctx, std::string stage) : ctx_(ctx), stage_(std::move(stage)), start_(Clock::now()) {}

  void input(const fs::path& path) { inputs_.push_back(path); }
  void output(const fs::path& path) { outputs_.push_back(path); }
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

  Artifacts finish() {
    const double wall = std::chrono::duration<double>(Clock::now() - start_).count();
    nlohmann::ordered_json m;
    m["stage"] = stage_;
    m["config_hash"] = sha256_hex(config_digest(ctx_.config));
    m["seed"] = ctx_.typed.seed;
    m["stage_seed"] = derive_seed(ctx_.typed.seed, stage_);
    m["jobs"] = ctx_.jobs;
    m["workdir"] = fs::absolute(ctx_.workdir).lexically_normal().string();
    m["inputs"] = hashes(inputs_);
    m["outputs"] = hashes(outputs_);
    for (auto it = extra_.begin(); it != extra_.end(); ++it) m[it.key()] = it.value();
    m["config"] = ctx_.config;
    m["wall_time_s"] = wall;
    const fs::path path = ctx_.workdir / ("manifest_" + stage_ + ".json");
    write_text(path, m.dump(2) + "\n");
    Artifacts out = outputs_;
    out.push_back(path);
    return out;
  }

 private:
  static nlohmann::ordered_json hashes(const std::vector<fs::path>& paths) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& p : paths) j[p.string()] = sha256_file(p);
    return j;
  }

  const RunContext& ctx_;
  std::string stage_;
  Clock::time_point start_;
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
  nlohmann::ordered_json extra_ = nlohmann::ordered_json::object();
};

std::shared_ptr<EmbeddingProvider> make_provider(const RunContext& ctx) {
  const SelectorSettings& s = ctx.typed.selector;
  std::shared_ptr<EmbeddingProvider> provider;
  std::string cache = s.cache;
  if (s.provider == "external") {
    provider = std::make_shared<ExternalEmbeddingProvider>(
        HttpEndpoint{s.endpoint, s.api_key_env, std::chrono::seconds(ctx.typed.llm.timeout_s)}, s.model);
    if (cache.empty()) cache = (ctx.workdir / "embeddings.jsonl").string();
  } else {
    provider = std::make_shared<TrigramEmbedder>();
  }
  if (!cache.empty()) provider = std::make_shared<CachedEmbeddingProvider>(provider, cache);
  return provider;
}

RelationSelector make_selector(const RunContext& ctx, const RelationCatalog& relations,
                               EmbeddingProvider& provider) {
  if (ctx.typed.selector.k > relations.size()) {
    throw ConfigError({"selector.k: " + std::to_string(ctx.typed.selector.k) + " exceeds the " +
                       std::to_string(relations.size()) + " relations in the catalog"});
  }
  return RelationSelector(relations, provider, SelectorConfig{ctx.typed.selector.k});
}

/// Backend plus where its transcript is written.
struct LlmSetup {
  std::shared_ptr<LlmBackend> backend;
  fs::path transcript_out;
  std::string transcript_in;
};

LlmSetup make_backend(const RunContext& ctx) {
  const LlmSettings& s = ctx.typed.llm;
  LlmSetup out;
  out.transcript_out = ctx.workdir / kTranscript;
  switch (s.backend) {
    case Backend::None:
      break;
    case Backend::Scripted:
      if (s.script.empty()) {
        out.backend = ScriptedBackend::candidate_echo();
      } else {
        if (!fs::exists(s.script)) throw ConfigError({"llm.script: cannot open " + s.script});
        out.backend = ScriptedBackend::from_script(s.script);
      }
      if (!s.transcript.empty()) out.transcript_out = s.transcript;
      break;
    case Backend::Replay:
      if (!fs::exists(s.transcript)) throw ConfigError({"llm.transcript: cannot open " + s.transcript});
      out.backend = std::make_shared<ReplayBackend>(Transcript::read(s.transcript));
      out.transcript_in = s.transcript;
      break;
    case Backend::Live:
      if (!s.api_key_env.empty() && !std::getenv(s.api_key_env.c_str())) {
        throw BackendError("environment variable " + s.api_key_env + " is not set");
      }
      out.backend = std::make_shared<LiveChatBackend>(
          HttpEndpoint{s.endpoint, s.api_key_env, std::chrono::seconds(s.timeout_s)});
      if (!s.transcript.empty()) out.transcript_out = s.transcript;
      break;
  }
  return out;
}

SessionOptions session_options(const RunContext& ctx) {
  SessionOptions o;
  o.max_retries = ctx.typed.llm.max_retries;
  o.backoff = std::chrono::milliseconds(ctx.typed.llm.backoff_ms);
  o.jobs = ctx.jobs;
  return o;
}

nlohmann::ordered_json rejected_json(std::span<const RejectedLine> rejected) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rejected) arr.push_back({{"line", r.line}, {"reason", reason_code(r.reason)}});
  return arr;
}

nlohmann::ordered_json failures_json(std::span<const HeadFailure> failures, const RelationCatalog& relations) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& f : failures) arr.push_back({{"head", relations.name(f.head)}, {"error", f.error}});
  return arr;
}

Artifacts ingest(const RunContext& ctx) {
  Manifest m(ctx, "ingest");
  const DatasetConfig& d = ctx.typed.dataset;
  std::vector<std::string> missing;
  if (d.historical.empty()) missing.push_back("dataset.historical: required by ingest");
  if (d.current.empty()) missing.push_back("dataset.current: required by ingest");
  if (d.future.empty()) missing.push_back("dataset.future: required by ingest");
  if (!missing.empty()) throw ConfigError(missing);
  if (d.entity2id.has_value() != d.relation2id.has_value()) {
    throw ConfigError({"dataset.entity2id: entity2id and relation2id must be given together"});
  }
  for (const auto& p : {d.historical, d.current, d.future}) {
    if (!fs::exists(p)) throw Error("dataset file not found: " + p.string());
    m.input(p);
  }
  if (d.entity2id) {
    m.input(*d.entity2id);
    m.input(*d.relation2id);
  }
  const Dataset ds = load_dataset({d.historical, d.current, d.future, d.entity2id, d.relation2id});
  fs::create_directories(ctx.workdir);
  const fs::path& w = ctx.workdir;
  write_quadruples(w / kHistorical, ds.split.historical, *ds.catalogs);
  write_quadruples(w / kCurrent, ds.split.current, *ds.catalogs);
  write_quadruples(w / kFuture, ds.split.future, *ds.catalogs);
  write_id_maps(w / kEntityIds, w / kRelationIds, *ds.catalogs);
  std::vector<Quadruple> all = concat(ds.split.historical, ds.split.current);
  all.insert(all.end(), ds.split.future.begin(), ds.split.future.end());
  write_text(w / kStats, kg_stats_json(build_kg(ds.catalogs, all, false).stats()) + "\n");
  log(ctx, "ingest") << ds.split.historical.size() << " historical, " << ds.split.current.size()
                     << " current, " << ds.split.future.size() << " future quadruples\n";
  for (const char* name : {kHistorical, kCurrent, kFuture, kEntityIds, kRelationIds, kStats}) m.output(w / name);
  return m.finish();
}

Artifacts sample_rules(const RunContext& ctx) {
  Manifest m(ctx, "sample-rules");
  const Dataset ds = load_workdir_dataset(ctx);
  m.input(ctx.workdir / kHistorical);
  const TemporalKG kg = build_kg(ds.catalogs, ds.split.historical, true);
  WalkConfig walk = ctx.typed.walk;
  walk.seed = derive_seed(ctx.typed.seed, "sample-rules");
  const auto heads = kg.relations_present();
  const RuleSet sampled = extract_rules(kg, heads, walk, ctx.jobs);
  write_rule_set(ctx.workdir / kSampled, sampled, ds.catalogs->relations);
  log(ctx, "sample-rules") << sampled.size() << " rules over " << heads.size() << " head relations\n";
  m.output(ctx.workdir / kSampled);
  return m.finish();
}

Artifacts generate(const RunContext& ctx) {
  Manifest m(ctx, "generate-rules");
  require_input(ctx.workdir / kSampled, "sample-rules");
  const Dataset ds = load_workdir_dataset(ctx);
  const RelationCatalog& relations = ds.catalogs->relations;
  const RuleSet sampled = read_rule_set(ctx.workdir / kSampled, relations);
  m.input(ctx.workdir / kSampled);

  LlmSetup llm = make_backend(ctx);
  m.set("backend", backend_name(ctx.typed.llm.backend));
  RuleSet generated = sampled;
  nlohmann::ordered_json report_doc;
  if (llm.backend) {
    auto provider = make_provider(ctx);
    const RelationSelector selector = make_selector(ctx, relations, *provider);
    const TemporalKG kg = build_kg(ds.catalogs, ds.split.historical, true);
    const auto heads = kg.relations_present();
    auto transcript = std::make_shared<Transcript>();
    LlmSession session(llm.backend, transcript, session_options(ctx));
    GenerationReport report;
    generated = generate_rules(session, relations, heads, sampled, selector, ctx.typed.generation, &report);
    transcript->write(llm.transcript_out);
    if (!llm.transcript_in.empty()) m.input(llm.transcript_in);
    m.set("transcript", llm.transcript_out.string());
    m.output(llm.transcript_out);
    report_doc["calls"] = report.calls;
    report_doc["accepted"] = report.accepted;
    report_doc["rejected"] = rejected_json(report.rejected);
    report_doc["failures"] = failures_json(report.failures, relations);
    log(ctx, "generate-rules") << report.calls << " calls, " << report.accepted << " accepted, "
                               << report.rejected.size() << " rejected lines, " << report.failures.size()
                               << " failed heads\n";
  } else {
    report_doc["calls"] = 0;
    report_doc["note"] = "backend none: generated set equals the sampled set";
  }
  write_rule_set(ctx.workdir / kGenerated, generated, relations);
  write_text(ctx.workdir / kGenerationLog, report_doc.dump(2) + "\n");
  log(ctx, "generate-rules") << generated.size() << " rules\n";
  m.output(ctx.workdir / kGenerated);
  m.output(ctx.workdir / kGenerationLog);
  return m.finish();
}

Artifacts adapt(const RunContext& ctx) {
  Manifest m(ctx, "adapt-rules");
  require_input(ctx.workdir / kGenerated, "generate-rules");
  const Dataset ds = load_workdir_dataset(ctx);
  const RelationCatalog& relations = ds.catalogs->relations;
  const RuleSet generated = read_rule_set(ctx.workdir / kGenerated, relations);
  m.input(ctx.workdir / kGenerated);

  std::vector<Quadruple> scoring_quads;
  switch (ctx.typed.rescore) {
    case RescoreSource::Current: scoring_quads = ds.split.current; break;
    case RescoreSource::Historical: scoring_quads = ds.split.historical; break;
    case RescoreSource::HistoricalCurrent: scoring_quads = concat(ds.split.historical, ds.split.current); break;
  }
  const TemporalKG scoring_kg = build_kg(ds.catalogs, scoring_quads, true);
  const TemporalKG current_kg = build_kg(ds.catalogs, ds.split.current, true);

  LlmSetup llm = make_backend(ctx);
  m.set("backend", backend_name(ctx.typed.llm.backend));
  auto provider = make_provider(ctx);
  const RelationSelector selector = make_selector(ctx, relations, *provider);

  AdaptationConfig config;
  config.theta = ctx.typed.theta;
  config.iterations = llm.backend ? ctx.typed.iterations : 0;
  config.walk = ctx.typed.walk;
  config.walk.seed = derive_seed(ctx.typed.seed, "adapt-rules");
  config.generation = ctx.typed.generation;
  config.confidence = ctx.typed.confidence;
  config.jobs = ctx.jobs;

  // Continue the transcript of generate-rules so sequence numbers stay unique.
  auto transcript = std::make_shared<Transcript>();
  const fs::path continued = llm.transcript_out;
  if (llm.backend && fs::exists(continued)) {
    for (auto& ex : Transcript::read(continued)) transcript->record(std::move(ex));
  }
  auto backend = llm.backend ? llm.backend : ScriptedBackend::candidate_echo();
  LlmSession session(backend, transcript, session_options(ctx));
  const AdaptationResult result = dynamic_adapt(session, generated, scoring_kg, current_kg, selector, config);
  if (llm.backend) {
    transcript->write(llm.transcript_out);
    if (!llm.transcript_in.empty()) m.input(llm.transcript_in);
    m.set("transcript", llm.transcript_out.string());
    m.output(llm.transcript_out);
  }

  write_scored_rules(ctx.workdir / kAdapted, result.adapted, relations);
  nlohmann::ordered_json doc;
  doc["iterations_run"] = result.iterations.size();
  auto iters = nlohmann::ordered_json::array();
  for (const auto& it : result.iterations) {
    iters.push_back({{"rules", it.rules},
                     {"low", it.low},
                     {"prompted_heads", it.prompted_heads},
                     {"replaced_heads", it.replaced_heads},
                     {"mean_confidence", it.mean_confidence}});
  }
  doc["iterations"] = std::move(iters);
  doc["rejected"] = rejected_json(result.rejected);
  doc["failures"] = failures_json(result.failures, relations);
  if (!llm.backend) doc["note"] = "backend none: no adaptation iterations";
  write_text(ctx.workdir / kAdaptationLog, doc.dump(2) + "\n");
  log(ctx, "adapt-rules") << result.adapted.size() << " rules after " << result.iterations.size()
                          << " iterations\n";
  m.output(ctx.workdir / kAdapted);
  m.output(ctx.workdir / kAdaptationLog);
  return m.finish();
}

Artifacts reason(const RunContext& ctx) {
  Manifest m(ctx, "reason");
  require_input(ctx.workdir / kAdapted, "adapt-rules");
  const Dataset ds = load_workdir_dataset(ctx);
  const auto rules = read_scored_rules(ctx.workdir / kAdapted, ds.catalogs->relations);
  m.input(ctx.workdir / kAdapted);
  m.input(ctx.workdir / kHistorical);
  m.input(ctx.workdir / kCurrent);
  m.input(ctx.workdir / kFuture);

  const TemporalKG evidence = build_kg(ds.catalogs, concat(ds.split.historical, ds.split.current), true);
  std::unique_ptr<GraphScorer> scorer;
  switch (ctx.typed.scorer) {
    case ScorerKind::Baseline:
      scorer = std::make_unique<RecencyFrequencyScorer>(evidence, ctx.typed.fusion.lambda);
      break;
    case ScorerKind::Import:
      if (!fs::exists(ctx.typed.graph_scores)) {
        throw ConfigError({"reason.graph_scores: cannot open " + ctx.typed.graph_scores});
      }
      scorer = std::make_unique<ImportedGraphScorer>(import_graph_scores(ctx.typed.graph_scores, *ds.catalogs));
      m.input(ctx.typed.graph_scores);
      break;
    case ScorerKind::None:
      break;
  }
  const Reasoner reasoner(evidence, rules, ctx.typed.fusion, scorer.get());
  EvalConfig ec;
  ec.jobs = ctx.jobs;
  ec.top_n = ctx.typed.top_n;
  const auto queries = make_queries(ds.split.future, true);
  const auto predictions = predict_all(reasoner, queries, ec);
  write_predictions(ctx.workdir / kPredictions, predictions, *ds.catalogs);
  log(ctx, "reason") << predictions.size() << " queries, " << reasoner.rule_count() << " rules above gamma\n";
  m.set("graph_scorer", scorer ? scorer->id() : "none");
  m.output(ctx.workdir / kPredictions);
  return m.finish();
}

Artifacts evaluate_stage(const RunContext& ctx) {
  Manifest m(ctx, "evaluate");
  require_input(ctx.workdir / kPredictions, "reason");
  const Dataset ds = load_workdir_dataset(ctx);
  const auto predictions = read_predictions(ctx.workdir / kPredictions, *ds.catalogs);
  m.input(ctx.workdir / kPredictions);
  const KnownFacts known(ds.split);
  const std::size_t n = ds.catalogs->entities.size();
  const SegmentedReport report = segment_predictions(predictions, ctx.typed.eval.segments, known, n);
  std::vector<EvalReport> horizon;
  if (ctx.typed.eval.horizon_k > 0) {
    horizon = horizon_reports(predictions, {ctx.typed.eval.horizon_delta_t, ctx.typed.eval.horizon_k},
                              evidence_boundary(ds.split), known, n);
  }
  write_text(ctx.workdir / kReportJson, report_json(report, config_digest(ctx.config), horizon));
  write_text(ctx.workdir / kReportTsv, report_tsv(report, horizon));
  log(ctx, "evaluate") << "MRR " << report.overall.mrr << " over " << report.overall.queries << " queries ("
                       << report.overall.missed << " missed)\n";
  m.output(ctx.workdir / kReportJson);
  m.output(ctx.workdir / kReportTsv);
  return m.finish();
}

}  // namespace

DependencyError::DependencyError(const fs::path& missing, const std::string& producer)
    : std::runtime_error("missing " + missing.string() + "; run `llmda " + producer + "` first"),
      producer_(producer) {}

std::string config_digest(const nlohmann::json& config) { return config.dump(); }

Artifacts run_stage(const std::string& stage, const RunContext& ctx) {
  fs::create_directories(ctx.workdir);
  if (stage == "ingest") return ingest(ctx);
  if (stage == "sample-rules") return sample_rules(ctx);
  if (stage == "generate-rules") return generate(ctx);
  if (stage == "adapt-rules") return adapt(ctx);
  if (stage == "reason") return reason(ctx);
  if (stage == "evaluate") return evaluate_stage(ctx);
  throw std::invalid_argument("unknown stage " + stage);
}

Artifacts run_pipeline(const RunContext& ctx) {
  Artifacts all;
  for (const char* stage : kStages) {
    for (auto& p : run_stage(stage, ctx)) {
      if (std::find(all.begin(), all.end(), p) == all.end()) all.push_back(std::move(p));
    }
  }
  return all;
}

}  // namespace llmda::cli
