#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace llmda::cli {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

/// Reads typed fields, collecting problems instead of throwing on the first.
class Reader {
 public:
  explicit Reader(const nlohmann::json& root) : root_(root) {}

  const nlohmann::json& at(const std::string& path) const {
    const nlohmann::json* node = &root_;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      node = &node->at(path.substr(start, dot - start));
      if (dot == std::string::npos) return *node;
      start = dot + 1;
    }
  }

  double number(const std::string& path, double lo, double hi) {
    const auto& v = at(path);
    if (!v.is_number()) return fail<double>(path, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x < lo || x > hi) {
      std::ostringstream msg;
      msg << "must be in [" << lo << ", " << hi << "], got " << x;
      return fail<double>(path, msg.str());
    }
    return x;
  }

  std::int64_t integer(const std::string& path, std::int64_t lo, std::int64_t hi) {
    const auto& v = at(path);
    if (!v.is_number_integer()) return fail<std::int64_t>(path, "must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > hi) {
      return fail<std::int64_t>(path, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                          "], got " + std::to_string(x));
    }
    return x;
  }

  std::uint64_t unsigned_integer(const std::string& path) {
    const auto& v = at(path);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      return fail<std::uint64_t>(path, "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& path) {
    const auto& v = at(path);
    if (!v.is_boolean()) return fail<bool>(path, "must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& path) {
    const auto& v = at(path);
    if (!v.is_string()) return fail<std::string>(path, "must be a string");
    return v.get<std::string>();
  }

  std::optional<std::string> optional_string(const std::string& path) {
    const auto& v = at(path);
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) return fail<std::optional<std::string>>(path, "must be a string or null");
    const auto s = v.get<std::string>();
    if (s.empty()) return std::nullopt;
    return s;
  }

  template <typename E>
  E choice(const std::string& path, const std::vector<std::pair<std::string, E>>& options) {
    const std::string s = string(path);
    std::string names;
    for (const auto& [name, value] : options) {
      if (name == s) return value;
      names += (names.empty() ? "" : ", ") + name;
    }
    if (at(path).is_string()) problems.push_back(path + ": must be one of " + names + ", got \"" + s + "\"");
    return options.front().second;
  }

  void require(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) problems.push_back(path + ": " + msg);
  }

  std::vector<std::string> problems;

 private:
  template <typename T>
  T fail(const std::string& path, const std::string& msg) {
    problems.push_back(path + ": " + msg);
    return T{};
  }

  const nlohmann::json& root_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration: " + join(problems)), problems_(std::move(problems)) {}

nlohmann::json default_config() {
  return nlohmann::json::parse(R"({
    "dataset": {"historical": "", "current": "", "future": "", "entity2id": null, "relation2id": null},
    "seed": 0,
    "walk": {"lambda": 0.1, "max_body_len": 3, "walks_per_relation": 200, "strict_within_body": false},
    "confidence": {"fanout_cap": 1000, "horizon": null},
    "selector": {"k": 20, "provider": "fallback-trigram", "endpoint": "", "model": "",
                 "api_key_env": "OPENAI_API_KEY", "cache": ""},
    "llm": {"backend": "none", "model": "gpt-3.5-turbo", "temperature": 0.0, "max_tokens": 1024,
            "endpoint": "https://api.openai.com/v1/chat/completions", "api_key_env": "OPENAI_API_KEY",
            "timeout_s": 60, "max_retries": 3, "backoff_ms": 500, "script": "", "transcript": "",
            "max_prompt_rules": 50, "restrict_to_candidates": true},
    "adapt": {"theta": 0.01, "iterations": 5, "rescore": "current"},
    "reason": {"alpha": 0.9, "gamma": 0.01, "lambda": 0.1, "normalization": "minmax",
               "scorer": "baseline", "graph_scores": "", "top_n": 100, "fanout_cap": 1000},
    "eval": {"segments": 1, "horizon_delta_t": 0, "horizon_k": 0}
  })");
}

void merge_config(nlohmann::json& base, const nlohmann::json& overlay, std::vector<std::string>& problems,
                  const std::string& prefix) {
  if (!overlay.is_object()) {
    problems.push_back((prefix.empty() ? std::string("config") : prefix) + ": must be an object");
    return;
  }
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) {
      problems.push_back(path + ": unknown key");
      continue;
    }
    auto& target = base[it.key()];
    if (target.is_object()) {
      merge_config(target, it.value(), problems, path);
    } else {
      target = it.value();
    }
  }
}

void apply_override(nlohmann::json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError({"--set " + assignment + ": expected key=value"});
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  nlohmann::json overlay = value;
  std::size_t end = key.size();
  while (true) {
    const auto dot = key.rfind('.', end - 1);
    const std::string part = key.substr(dot == std::string::npos ? 0 : dot + 1,
                                        end - (dot == std::string::npos ? 0 : dot + 1));
    overlay = nlohmann::json{{part, std::move(overlay)}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  std::vector<std::string> problems;
  merge_config(config, overlay, problems);
  if (!problems.empty()) throw ConfigError(problems);
}

nlohmann::json resolve_config(const std::optional<std::filesystem::path>& file,
                              const std::vector<std::string>& overrides) {
  nlohmann::json config = default_config();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError({"--config: cannot open " + file->string()});
    nlohmann::json loaded = nlohmann::json::parse(in, nullptr, false);
    if (loaded.is_discarded()) throw ConfigError({"--config: " + file->string() + " is not valid JSON"});
    std::vector<std::string> problems;
    merge_config(config, loaded, problems);
    if (!problems.empty()) throw ConfigError(problems);
    // Relative dataset paths are relative to the config file.
    const auto base = file->parent_path();
    for (const char* key : {"historical", "current", "future", "entity2id", "relation2id"}) {
      auto& v = config["dataset"][key];
      if (v.is_string() && !v.get<std::string>().empty() && std::filesystem::path(v.get<std::string>()).is_relative()) {
        v = (base / v.get<std::string>()).lexically_normal().string();
      }
    }
  }
  for (const auto& o : overrides) apply_override(config, o);
  return config;
}

PipelineConfig parse_config(const nlohmann::json& config) {
  Reader r(config);
  PipelineConfig c;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::int64_t kBig = std::numeric_limits<std::int32_t>::max();

  c.dataset.historical = r.string("dataset.historical");
  c.dataset.current = r.string("dataset.current");
  c.dataset.future = r.string("dataset.future");
  if (auto p = r.optional_string("dataset.entity2id")) c.dataset.entity2id = *p;
  if (auto p = r.optional_string("dataset.relation2id")) c.dataset.relation2id = *p;
  c.seed = r.unsigned_integer("seed");

  c.walk.lambda = r.number("walk.lambda", 0.0, kInf);
  c.walk.max_body_len = static_cast<std::size_t>(r.integer("walk.max_body_len", 1, 8));
  c.walk.walks_per_relation = static_cast<std::size_t>(r.integer("walk.walks_per_relation", 1, kBig));
  c.walk.strict_within_body = r.boolean("walk.strict_within_body");

  c.confidence.grounding.fanout_cap = static_cast<std::size_t>(r.integer("confidence.fanout_cap", 1, kBig));
  c.confidence.grounding.strict_within_body = c.walk.strict_within_body;
  if (!r.at("confidence.horizon").is_null()) {
    c.confidence.horizon = r.integer("confidence.horizon", 1, kBig);
  }

  c.selector.k = static_cast<std::size_t>(r.integer("selector.k", 1, kBig));
  c.selector.provider = r.string("selector.provider");
  r.require(c.selector.provider == "fallback-trigram" || c.selector.provider == "external", "selector.provider",
            "must be one of fallback-trigram, external");
  c.selector.endpoint = r.string("selector.endpoint");
  c.selector.model = r.string("selector.model");
  c.selector.api_key_env = r.string("selector.api_key_env");
  c.selector.cache = r.string("selector.cache");
  if (c.selector.provider == "external") {
    r.require(!c.selector.endpoint.empty(), "selector.endpoint", "required for the external provider");
    r.require(!c.selector.model.empty(), "selector.model", "required for the external provider");
  }

  c.llm.backend = r.choice<Backend>("llm.backend", {{"none", Backend::None},
                                                    {"scripted", Backend::Scripted},
                                                    {"replay", Backend::Replay},
                                                    {"live", Backend::Live}});
  c.generation.model = r.string("llm.model");
  c.generation.temperature = r.number("llm.temperature", 0.0, 2.0);
  c.generation.max_tokens = static_cast<int>(r.integer("llm.max_tokens", 1, kBig));
  c.generation.max_prompt_rules = static_cast<std::size_t>(r.integer("llm.max_prompt_rules", 0, kBig));
  c.generation.restrict_to_candidates = r.boolean("llm.restrict_to_candidates");
  c.llm.endpoint = r.string("llm.endpoint");
  c.llm.api_key_env = r.string("llm.api_key_env");
  c.llm.timeout_s = static_cast<int>(r.integer("llm.timeout_s", 1, 3600));
  c.llm.max_retries = static_cast<std::size_t>(r.integer("llm.max_retries", 0, 10));
  c.llm.backoff_ms = static_cast<int>(r.integer("llm.backoff_ms", 0, 600000));
  c.llm.script = r.string("llm.script");
  c.llm.transcript = r.string("llm.transcript");
  if (c.llm.backend == Backend::Replay) {
    r.require(!c.llm.transcript.empty(), "llm.transcript", "required for the replay backend");
  }
  if (c.llm.backend == Backend::Live) {
    r.require(!c.llm.endpoint.empty(), "llm.endpoint", "required for the live backend");
  }

  c.theta = r.number("adapt.theta", 0.0, 1.0);
  c.iterations = static_cast<std::size_t>(r.integer("adapt.iterations", 0, 1000));
  c.rescore = r.choice<RescoreSource>("adapt.rescore", {{"current", RescoreSource::Current},
                                                        {"historical", RescoreSource::Historical},
                                                        {"historical+current", RescoreSource::HistoricalCurrent}});

  c.fusion.alpha = r.number("reason.alpha", 0.0, 1.0);
  c.fusion.gamma = r.number("reason.gamma", 0.0, 1.0);
  c.fusion.lambda = r.number("reason.lambda", 0.0, kInf);
  c.fusion.normalization = r.choice<Normalization>(
      "reason.normalization", {{"minmax", Normalization::MinMax}, {"none", Normalization::None}});
  c.fusion.fanout_cap = static_cast<std::size_t>(r.integer("reason.fanout_cap", 1, kBig));
  c.fusion.strict_within_body = c.walk.strict_within_body;
  c.scorer = r.choice<ScorerKind>("reason.scorer", {{"baseline", ScorerKind::Baseline},
                                                    {"import", ScorerKind::Import},
                                                    {"none", ScorerKind::None}});
  c.graph_scores = r.string("reason.graph_scores");
  if (c.scorer == ScorerKind::Import) {
    r.require(!c.graph_scores.empty(), "reason.graph_scores", "required when reason.scorer is import");
  }
  c.top_n = static_cast<std::size_t>(r.integer("reason.top_n", 1, kBig));

  c.eval.segments = static_cast<std::size_t>(r.integer("eval.segments", 1, 10000));
  c.eval.horizon_delta_t = r.integer("eval.horizon_delta_t", 0, kBig);
  c.eval.horizon_k = static_cast<std::size_t>(r.integer("eval.horizon_k", 0, 10000));
  r.require((c.eval.horizon_delta_t == 0) == (c.eval.horizon_k == 0), "eval.horizon_k",
            "horizon_delta_t and horizon_k must both be set or both be 0");

  if (!r.problems.empty()) throw ConfigError(r.problems);
  return c;
}

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::None: return "none";
    case Backend::Scripted: return "scripted";
    case Backend::Replay: return "replay";
    case Backend::Live: return "live";
  }
  return "none";
}

}  // namespace llmda::cli
