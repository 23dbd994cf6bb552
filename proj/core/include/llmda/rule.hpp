#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "llmda/catalog.hpp"

namespace llmda {

/// Chain rule head(X, Y, T_{k+1}) <- body[0](X, Z1, T1) & ... & body[k-1](Z_{k-1}, Y, Tk).
struct Rule {
  RelationId head{};
  std::vector<RelationId> body;

  auto operator<=>(const Rule&) const = default;
  bool operator==(const Rule&) const = default;
};

/// Rule -> support (number of distinct sampled groundings; 0 for rules that
/// did not come from sampling).
using RuleSet = std::map<Rule, std::uint64_t>;

struct ScoredRule {
  Rule rule;
  std::uint64_t body_support = 0;
  std::uint64_t rule_support = 0;
  double confidence = 0.0;
};

/// Renders a rule in the prompt surface grammar, e.g.
/// "Cooperate_economically (X, Y, T3) ← Host_a_visit (X, Z1, T1) & Negotiate (Z1, Y, T2)".
std::string format_rule(const Rule& rule, const RelationCatalog& relations);

/// Rules ordered by (head name, body names); the canonical output order.
std::vector<Rule> sorted_by_name(const std::vector<Rule>& rules, const RelationCatalog& relations);

void write_rule_set(std::ostream& out, const RuleSet& rules, const RelationCatalog& relations);
void write_rule_set(const std::filesystem::path& path, const RuleSet& rules,
                    const RelationCatalog& relations);
RuleSet read_rule_set(const std::filesystem::path& path, const RelationCatalog& relations);

void write_scored_rules(std::ostream& out, const std::vector<ScoredRule>& rules,
                        const RelationCatalog& relations);
void write_scored_rules(const std::filesystem::path& path, const std::vector<ScoredRule>& rules,
                        const RelationCatalog& relations);
std::vector<ScoredRule> read_scored_rules(const std::filesystem::path& path,
                                          const RelationCatalog& relations);

}  // namespace llmda
