#include "llmda/orchestrator.hpp"

#include <algorithm>
#include <map>

#include "llmda/prompts.hpp"
#include "llmda/random.hpp"

namespace llmda {

namespace {

/// Prompt lines for a head's rules: support descending, then name order, capped.
std::vector<std::string> prompt_lines(const RuleSet& rules, RelationId head,
                                      const RelationCatalog& catalog, std::size_t cap) {
  std::vector<Rule> mine;
  for (const auto& [rule, support] : rules) {
    if (rule.head == head) mine.push_back(rule);
  }
  mine = sorted_by_name(mine, catalog);
  std::stable_sort(mine.begin(), mine.end(),
                   [&](const Rule& a, const Rule& b) { return rules.at(a) > rules.at(b); });
  if (mine.size() > cap) mine.resize(cap);
  std::vector<std::string> out;
  out.reserve(mine.size());
  for (const Rule& r : mine) out.push_back(format_rule(r, catalog));
  return out;
}

std::vector<std::string> candidate_names(const std::vector<RelationId>& ids,
                                         const RelationCatalog& catalog) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (RelationId r : ids) out.push_back(catalog.display_name(r));
  return out;
}

ChatRequest make_request(const GenerationConfig& config, std::string prompt) {
  ChatRequest rq;
  rq.model = config.model;
  rq.temperature = config.temperature;
  rq.max_tokens = config.max_tokens;
  rq.user = std::move(prompt);
  return rq;
}

/// Accepted rules of `text` whose head is `head`; everything else goes to `rejected`.
std::vector<Rule> parse_for_head(const std::string& text, RelationId head,
                                 const RelationCatalog& catalog,
                                 const std::vector<RelationId>& candidates, bool restrict,
                                 std::vector<RejectedLine>& rejected) {
  const std::set<RelationId> allowed(candidates.begin(), candidates.end());
  auto parsed = parse_rules(text, catalog, restrict ? &allowed : nullptr);
  rejected.insert(rejected.end(), parsed.rejected.begin(), parsed.rejected.end());
  std::vector<Rule> out;
  for (Rule& r : parsed.accepted) {
    if (r.head != head) {
      rejected.push_back({format_rule(r, catalog), RejectReason::HeadMismatch,
                          "expected head '" + catalog.display_name(head) + "'"});
      continue;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RelationId> unique_sorted(std::span<const RelationId> ids) {
  std::vector<RelationId> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double mean_confidence(const std::vector<ScoredRule>& rules) {
  if (rules.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : rules) s += r.confidence;
  return s / static_cast<double>(rules.size());
}

std::vector<Rule> keys_of(const RuleSet& set) {
  std::vector<Rule> out;
  out.reserve(set.size());
  for (const auto& [r, s] : set) out.push_back(r);
  return out;
}

}  // namespace

RuleSet generate_rules(LlmSession& session, const RelationCatalog& catalog,
                       std::span<const RelationId> heads_in, const RuleSet& sampled,
                       const RelationSelector& selector, const GenerationConfig& config,
                       GenerationReport* report) {
  const auto heads = unique_sorted(heads_in);
  std::vector<std::vector<RelationId>> candidates;
  std::vector<ChatRequest> requests;
  candidates.reserve(heads.size());
  requests.reserve(heads.size());
  for (RelationId head : heads) {
    candidates.push_back(selector.top_k(head));
    const auto lines = prompt_lines(sampled, head, catalog, config.max_prompt_rules);
    const auto names = candidate_names(candidates.back(), catalog);
    requests.push_back(make_request(
        config, render_generation_prompt(catalog.display_name(head), lines, names)));
  }
  const auto outcomes = session.complete_batch(requests);

  GenerationReport local;
  RuleSet out = sampled;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    ++local.calls;
    if (!outcomes[i].response) {
      local.failures.push_back({heads[i], outcomes[i].error});
      continue;
    }
    for (Rule& r : parse_for_head(outcomes[i].response->text, heads[i], catalog, candidates[i],
                                  config.restrict_to_candidates, local.rejected)) {
      ++local.accepted;
      out.try_emplace(std::move(r), 0);
    }
  }
  if (report) *report = std::move(local);
  return out;
}

AdaptationResult dynamic_adapt(LlmSession& session, const RuleSet& generated,
                               const TemporalKG& scoring_kg, const TemporalKG& current_kg,
                               const RelationSelector& selector, const AdaptationConfig& config) {
  if (!(config.theta >= 0.0 && config.theta <= 1.0)) throw ValidationError("theta must lie in [0, 1]");
  config.walk.validate();
  const RelationCatalog& catalog = scoring_kg.relations();
  AdaptationResult result;
  RuleSet working = generated;

  for (std::size_t iter = 0; iter < config.iterations; ++iter) {
    const auto rules = keys_of(working);
    const auto scored = score_rules(rules, scoring_kg, config.confidence, config.jobs);
    const auto part = partition_by_threshold(scored, config.theta);
    IterationStats stats;
    stats.rules = scored.size();
    stats.low = part.low.size();
    stats.mean_confidence = mean_confidence(scored);
    if (part.low.empty()) {
      result.iterations.push_back(stats);
      break;
    }

    std::map<RelationId, std::vector<Rule>> low_by_head;
    for (const ScoredRule& s : part.low) low_by_head[s.rule.head].push_back(s.rule);
    std::vector<RelationId> heads;
    for (const auto& [h, v] : low_by_head) heads.push_back(h);

    WalkConfig walk = config.walk;
    walk.seed = derive_seed(config.walk.seed, iter + 1);
    const RuleSet extracted = extract_rules(current_kg, heads, walk, config.jobs);

    std::vector<std::vector<RelationId>> candidates;
    std::vector<ChatRequest> requests;
    for (RelationId head : heads) {
      candidates.push_back(selector.top_k(head));
      std::vector<std::string> low_lines;
      for (const Rule& r : sorted_by_name(low_by_head[head], catalog)) {
        low_lines.push_back(format_rule(r, catalog));
      }
      const auto current_lines =
          prompt_lines(extracted, head, catalog, config.generation.max_prompt_rules);
      auto prompt = render_adaptation_prompt(catalog.display_name(head), low_lines, current_lines,
                                             candidate_names(candidates.back(), catalog));
      requests.push_back(make_request(config.generation, std::move(*prompt)));
    }
    const auto outcomes = session.complete_batch(requests);
    stats.prompted_heads = heads.size();

    for (std::size_t i = 0; i < heads.size(); ++i) {
      if (!outcomes[i].response) {
        result.failures.push_back({heads[i], outcomes[i].error});
        continue;
      }
      auto replacements =
          parse_for_head(outcomes[i].response->text, heads[i], catalog, candidates[i],
                         config.generation.restrict_to_candidates, result.rejected);
      if (replacements.empty()) continue;
      std::map<Rule, std::uint64_t> kept_support;
      for (const Rule& r : low_by_head[heads[i]]) {
        kept_support[r] = working.at(r);
        working.erase(r);
      }
      for (Rule& r : replacements) {
        const auto it = kept_support.find(r);
        working.try_emplace(std::move(r), it == kept_support.end() ? 0 : it->second);
      }
      ++stats.replaced_heads;
    }
    result.iterations.push_back(stats);
  }

  result.adapted = score_rules(keys_of(working), scoring_kg, config.confidence, config.jobs);
  return result;
}

}  // namespace llmda
