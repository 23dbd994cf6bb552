#include "llmda/rule.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace llmda {

namespace {

using NameKey = std::pair<std::string, std::vector<std::string>>;

NameKey name_key(const Rule& r, const RelationCatalog& relations) {
  NameKey key{relations.name(r.head), {}};
  key.second.reserve(r.body.size());
  for (RelationId b : r.body) key.second.push_back(relations.name(b));
  return key;
}

nlohmann::ordered_json rule_json(const Rule& r, const RelationCatalog& relations) {
  nlohmann::ordered_json j;
  j["head"] = relations.name(r.head);
  auto body = nlohmann::ordered_json::array();
  for (RelationId b : r.body) body.push_back(relations.name(b));
  j["body"] = std::move(body);
  return j;
}

RelationId resolve(const RelationCatalog& relations, const std::string& name,
                   const std::string& where, std::size_t line) {
  auto id = relations.find(name);
  if (!id) throw ParseError(where, line, "unknown relation '" + name + "'");
  return *id;
}

Rule parse_rule_json(const nlohmann::json& j, const RelationCatalog& relations,
                     const std::string& where, std::size_t line) {
  Rule r;
  r.head = resolve(relations, j.at("head").get<std::string>(), where, line);
  for (const auto& b : j.at("body")) {
    r.body.push_back(resolve(relations, b.get<std::string>(), where, line));
  }
  if (r.body.empty()) throw ParseError(where, line, "rule body is empty");
  return r;
}

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      fn(j, lineno);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
}

}  // namespace

std::string format_rule(const Rule& rule, const RelationCatalog& relations) {
  const std::size_t k = rule.body.size();
  std::ostringstream out;
  out << relations.display_name(rule.head) << " (X, Y, T" << k + 1 << ") ← ";
  for (std::size_t i = 0; i < k; ++i) {
    if (i > 0) out << " & ";
    const std::string subj = i == 0 ? "X" : "Z" + std::to_string(i);
    const std::string obj = i + 1 == k ? "Y" : "Z" + std::to_string(i + 1);
    out << relations.display_name(rule.body[i]) << " (" << subj << ", " << obj << ", T" << i + 1
        << ")";
  }
  return out.str();
}

std::vector<Rule> sorted_by_name(const std::vector<Rule>& rules, const RelationCatalog& relations) {
  std::vector<std::pair<NameKey, Rule>> keyed;
  keyed.reserve(rules.size());
  for (const Rule& r : rules) keyed.emplace_back(name_key(r, relations), r);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Rule> out;
  out.reserve(rules.size());
  for (auto& [k, r] : keyed) out.push_back(std::move(r));
  return out;
}

void write_rule_set(std::ostream& out, const RuleSet& rules, const RelationCatalog& relations) {
  std::vector<Rule> keys;
  keys.reserve(rules.size());
  for (const auto& [r, s] : rules) keys.push_back(r);
  for (const Rule& r : sorted_by_name(keys, relations)) {
    auto j = rule_json(r, relations);
    j["support"] = rules.at(r);
    out << j.dump() << '\n';
  }
}

void write_rule_set(const std::filesystem::path& path, const RuleSet& rules,
                    const RelationCatalog& relations) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_rule_set(out, rules, relations);
}

RuleSet read_rule_set(const std::filesystem::path& path, const RelationCatalog& relations) {
  RuleSet rules;
  for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line) {
    Rule r = parse_rule_json(j, relations, path.string(), line);
    rules[std::move(r)] += j.value("support", std::uint64_t{0});
  });
  return rules;
}

void write_scored_rules(std::ostream& out, const std::vector<ScoredRule>& rules,
                        const RelationCatalog& relations) {
  std::vector<Rule> keys;
  std::map<Rule, const ScoredRule*> by_rule;
  for (const ScoredRule& s : rules) {
    if (by_rule.emplace(s.rule, &s).second) keys.push_back(s.rule);
  }
  for (const Rule& r : sorted_by_name(keys, relations)) {
    const ScoredRule& s = *by_rule.at(r);
    auto j = rule_json(r, relations);
    j["confidence"] = s.confidence;
    j["body_support"] = s.body_support;
    j["rule_support"] = s.rule_support;
    out << j.dump() << '\n';
  }
}

void write_scored_rules(const std::filesystem::path& path, const std::vector<ScoredRule>& rules,
                        const RelationCatalog& relations) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_scored_rules(out, rules, relations);
}

std::vector<ScoredRule> read_scored_rules(const std::filesystem::path& path,
                                          const RelationCatalog& relations) {
  std::vector<ScoredRule> out;
  for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line) {
    ScoredRule s;
    s.rule = parse_rule_json(j, relations, path.string(), line);
    s.confidence = j.at("confidence").get<double>();
    s.body_support = j.at("body_support").get<std::uint64_t>();
    s.rule_support = j.at("rule_support").get<std::uint64_t>();
    if (s.confidence < 0.0 || s.confidence > 1.0 || s.rule_support > s.body_support) {
      throw ParseError(path.string(), line, "inconsistent rule statistics");
    }
    out.push_back(std::move(s));
  });
  return out;
}

}  // namespace llmda
