#include "llmda/prompts.hpp"

#include <sstream>
#include <vector>

namespace llmda {

namespace {

constexpr std::string_view kRuleDefinition =
    "    Temporal Logical Rules \"R_l(X, Y, T_l) ← ∧_{i=1}^{l-1} R_i(X, Y, T_i)\" typically "
    "describe how the relation 'R_l' between entities 'X' and 'Y' evolves from past time steps "
    "'T_i (i={1, ···, (l-1)})' (Rule body) to the next timestamp 'T_l' (Rule head), and please "
    "follow the constraint \"T_1 ≤ ··· ≤ T_{l-1} < T_l\".\n";

constexpr std::string_view kGenerationTask =
    "You are an expert in temporal knowledge graph reasoning, and please generate as many "
    "temporal logical rules as possible related to 'R_l' based on extracted temporal rules.\n";

constexpr std::string_view kGenerationExamples =
    "Here are a few examples: \n"
    "\n"
    "Example 1:\n"
    "    Rule Head:\n"
    "        Cooperate_economically (X, Y, T)\n"
    "    Extracted Rules:\n"
    "        Cooperate_economically (X, Y, T2) ← Provide_aid (X, Y, T1)\n"
    "        Cooperate_economically (X, Y, T3) ← Host_a_visit (X, Z1, T1) & Negotiate (Z1, Y, T2)\n"
    "        ···\n"
    "    Generated Temporal Logical Rules:\n"
    "        Cooperate_economically (X, Y, T2) ← Engage_in_negotiation (X, Y, T1)\n"
    "        Cooperate_economically (X, Y, T3) ← inv_Engage_in_negotiation (X, Z1, T1) & "
    "Make_a_visit (Z1, Y, T2)\n"
    "        ···\n"
    "\n"
    "Example 2:\n"
    "    Rule Head:\n"
    "        Appeal_for_economic_aid (X, Y, T)\n"
    "    Extracted Rules:\n"
    "        Appeal_for_economic_aid (X, Y, T2) ← inv_Reduce_or_stop_military_assistance (X, Y, T1)\n"
    "        Appeal_for_economic_aid (X, Y, T3) ← inv_Express_intent_to_cooperate (X, Z1, T1) & "
    "Make_statement (Z1, Y, T2)\n"
    "        ···\n"
    "    Generated Temporal Logical Rules:\n"
    "        Appeal_for_economic_aid (X, Y, T2) ← Make_an_appeal_or_request (X, Y, T1)\n"
    "        Appeal_for_economic_aid (X, Y, T3) ← inv_Make_an_appeal_or_request (X, Z1, T1) & "
    "Make_statement (Z1, Y, T2)\n"
    "        ···\n";

constexpr std::string_view kAdaptationTask =
    "    You are an expert in temporal knowledge graph reasoning, and please analyze these "
    "LLMs-generated rules and update the low-quality rules based on the extracted rules from "
    "current data. \n";

constexpr std::string_view kAdaptationExamples =
    "Here are a few examples: \n"
    "\n"
    "Example 1:\n"
    "    Rule Head: \n"
    "        inv_Provide_humanitarian_aid (X, Y, T)\n"
    "    Low Quality Temporal Logical Rules:\n"
    "        Make_a_visit (X, Y, T2) ← Provide_military_protection_or_peacekeeping (X, Y, T1)\n"
    "        Make_a_visit (X, Y, T4) ← Appeal_for_diplomatic_cooperation_(such_as_policy_support) "
    "(X, Z1, T1) & inv_Consult (Z1, Z2, T2) & inv_Make_statement (Z2, Y, T3)\n"
    "    Generated High Quality Temporal Logical Rules:\n"
    "        Make_a_visit (X, Y, T2) ← Express_intent_to_meet_or_negotiate (X, Z1, T1) & "
    "Make_a_visit (Z1, Y, T2)\n"
    "        Make_a_visit (X, Y, T3) ← Consult (X, Z1, T1) & Engage_in_negotiation (Z1, Z2, T2) & "
    "Make_a_visit (Z2, Y, T3)\n"
    "        ···\n"
    "\n"
    "Example 2:\n"
    "    Rule Head: \n"
    "        inv_Provide_humanitarian_aid (X, Y, T)\n"
    "    Low Quality Temporal Logical Rules:\n"
    "        inv_Provide_humanitarian_aid (X, Y, T2) ← inv_Investigate (X, Y, T1)\n"
    "        inv_Provide_humanitarian_aid (X, Y, T2) ← inv_Engage_in_diplomatic_cooperation (X, Y, "
    "T1)\n"
    "    Generated High Quality Temporal Logical Rules:\n"
    "        inv_Provide_humanitarian_aid (X, Y, T2) ← inv_Provide_aid (X, Y, T1)\n"
    "        inv_Provide_humanitarian_aid (X, Y, T3) ← Criticize_or_denounce (X, Z1, T1) & "
    "Sign_formal_agreement (Z1, Y, T2)\n"
    "        ...\n";

constexpr std::string_view kClosing = "    Return the rules only without any explanations.\n";

void rule_block(std::ostringstream& out, std::span<const std::string> rules) {
  for (const auto& r : rules) out << "    " << r << '\n';
}

std::string candidate_list(std::span<const std::string> candidates) {
  std::string out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i > 0) out += ", ";
    out += candidates[i];
  }
  return out;
}

std::string between(std::string_view text, std::string_view open, std::string_view close) {
  const auto a = text.find(open);
  if (a == std::string_view::npos) return {};
  const auto start = a + open.size();
  const auto b = text.find(close, start);
  if (b == std::string_view::npos) return {};
  return std::string(text.substr(start, b - start));
}

}  // namespace

std::string render_generation_prompt(std::string_view head, std::span<const std::string> sampled_rules,
                                     std::span<const std::string> candidates) {
  std::ostringstream out;
  out << kRuleDefinition << '\n'
      << kGenerationTask << '\n'
      << kGenerationExamples << '\n'
      << "Extracted Rules from Historical Data:\n";
  rule_block(out, sampled_rules);
  out << '\n'
      << "    Let's think step-by-step, please generate as many as possible most relevant temporal "
         "rules that are relative to \""
      << head << " (X,Y,T)\" based on the above extracted rules from historical data.\n"
      << "    For the relations in rule body, you are going to choose from the candidate relations: \""
      << candidate_list(candidates) << "\".\n"
      << '\n'
      << kClosing;
  return out.str();
}

std::optional<std::string> render_adaptation_prompt(std::string_view head,
                                                    std::span<const std::string> low_rules,
                                                    std::span<const std::string> current_rules,
                                                    std::span<const std::string> candidates) {
  if (low_rules.empty()) return std::nullopt;
  std::ostringstream out;
  out << kRuleDefinition << '\n'
      << kAdaptationTask << '\n'
      << kAdaptationExamples << '\n'
      << "Low-quality Temporal Logical Rules:\n";
  rule_block(out, low_rules);
  out << '\n' << "Extracted Rules from Current Data:\n";
  rule_block(out, current_rules);
  out << '\n'
      << "    Let's think step-by-step, and please update the low-quality temporal logic rules "
         "related to \""
      << head << " (X,Y,T)\" based on the extracted rules from current data.\n"
      << "    For the relations in rule body, you are going to choose from the candidate relations: \""
      << candidate_list(candidates) << "\".\n"
      << '\n'
      << kClosing;
  return out.str();
}

std::string candidate_echo_response(std::string_view prompt) {
  std::string head = between(prompt, "relative to \"", " (X,Y,T)\"");
  if (head.empty()) head = between(prompt, "related to \"", " (X,Y,T)\"");
  const std::string list = between(prompt, "choose from the candidate relations: \"", "\".");
  std::vector<std::string> cands;
  std::size_t start = 0;
  while (!list.empty() && start <= list.size()) {
    const auto comma = list.find(", ", start);
    cands.push_back(list.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 2;
  }
  if (head.empty() || cands.empty()) return "I cannot find a rule head in this prompt.";
  std::ostringstream out;
  for (std::size_t i = 0; i < cands.size() && i < 3; ++i) {
    out << head << " (X, Y, T2) ← " << cands[i] << " (X, Y, T1)\n";
  }
  if (cands.size() >= 2) {
    out << head << " (X, Y, T3) ← " << cands[0] << " (X, Z1, T1) & " << cands[1] << " (Z1, Y, T2)\n";
  }
  return out.str();
}

}  // namespace llmda
