#pragma once

#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "llmda/catalog.hpp"
#include "llmda/rule.hpp"

namespace llmda {

enum class RejectReason {
  NotARuleLine,
  MalformedAtom,
  EmptyBody,
  BadHeadArguments,
  BrokenChain,
  BadTimestamps,
  UnknownRelation,
  NotACandidate,
  HeadMismatch,
};

/// Stable machine-readable code, e.g. "broken_chain".
std::string_view reason_code(RejectReason reason);

struct RejectedLine {
  std::string line;
  RejectReason reason{};
  std::string detail;
};

struct ParsedRules {
  std::vector<Rule> accepted;
  std::vector<RejectedLine> rejected;
};

/// Parses one line of the surface grammar
///   Head(X, Y, Tn) <- R1(X, Z1, T1) & R2(Z1, Z2, T2) & ... & Rk(Z_{k-1}, Y, Tk)
/// "←" and "<-" both work, as do "Z_1"/"T_1" spellings and list bullets.
/// The head time may be written as T or Tn with n >= k.
std::variant<Rule, RejectedLine> parse_rule_line(std::string_view line, const RelationCatalog& catalog,
                                                 const std::set<RelationId>* allowed = nullptr);

/// Parses every non-blank line. `allowed`, when given, restricts body relations.
ParsedRules parse_rules(std::string_view text, const RelationCatalog& catalog,
                        const std::set<RelationId>* allowed = nullptr);

}  // namespace llmda
