#include "llmda/rule_parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>

namespace llmda {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view strip_bullet(std::string_view s) {
  if (s.starts_with("- ") || s.starts_with("* ")) return trim(s.substr(2));
  if (s.starts_with("• ")) return trim(s.substr(std::string_view("• ").size()));
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i + 1 < s.size() && (s[i] == '.' || s[i] == ')') && s[i + 1] == ' ') {
    return trim(s.substr(i + 2));
  }
  return s;
}

std::vector<std::string_view> split(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + sep.size();
  }
}

struct Atom {
  std::string_view name;
  std::vector<std::string> args;
};

/// "Name (a, b, c)": the argument list is the last parenthesized group, so
/// names may themselves contain parentheses.
std::optional<Atom> parse_atom(std::string_view text) {
  text = trim(text);
  if (text.empty() || text.back() != ')') return std::nullopt;
  const auto open = text.rfind('(');
  if (open == std::string_view::npos || open == 0) return std::nullopt;
  Atom atom;
  atom.name = trim(text.substr(0, open));
  if (atom.name.empty()) return std::nullopt;
  for (auto arg : split(text.substr(open + 1, text.size() - open - 2), ",")) {
    std::string a;
    for (char c : trim(arg)) {
      if (c != '_') a.push_back(c);
    }
    atom.args.push_back(std::move(a));
  }
  if (atom.args.size() != 3) return std::nullopt;
  return atom;
}

/// "T" -> 0, "T7" -> 7, anything else -> nullopt.
std::optional<int> time_index(const std::string& arg) {
  if (arg.empty() || arg[0] != 'T') return std::nullopt;
  if (arg.size() == 1) return 0;
  int v = 0;
  auto [p, ec] = std::from_chars(arg.data() + 1, arg.data() + arg.size(), v);
  if (ec != std::errc{} || p != arg.data() + arg.size() || v < 1) return std::nullopt;
  return v;
}

RejectedLine reject(std::string_view line, RejectReason reason, std::string detail) {
  return RejectedLine{std::string(line), reason, std::move(detail)};
}

}  // namespace

std::string_view reason_code(RejectReason reason) {
  switch (reason) {
    case RejectReason::NotARuleLine: return "not_a_rule_line";
    case RejectReason::MalformedAtom: return "malformed_atom";
    case RejectReason::EmptyBody: return "empty_body";
    case RejectReason::BadHeadArguments: return "bad_head_arguments";
    case RejectReason::BrokenChain: return "broken_chain";
    case RejectReason::BadTimestamps: return "bad_timestamps";
    case RejectReason::UnknownRelation: return "unknown_relation";
    case RejectReason::NotACandidate: return "not_a_candidate";
    case RejectReason::HeadMismatch: return "head_mismatch";
  }
  return "unknown";
}

std::variant<Rule, RejectedLine> parse_rule_line(std::string_view raw, const RelationCatalog& catalog,
                                                 const std::set<RelationId>* allowed) {
  const std::string_view line = strip_bullet(trim(raw));
  std::size_t arrow = line.find("←");
  std::size_t arrow_len = std::string_view("←").size();
  if (arrow == std::string_view::npos) {
    arrow = line.find("<-");
    arrow_len = 2;
  }
  if (arrow == std::string_view::npos) return reject(raw, RejectReason::NotARuleLine, "no '<-' or '←'");

  const auto head = parse_atom(line.substr(0, arrow));
  if (!head) return reject(raw, RejectReason::MalformedAtom, "rule head is not Name(X, Y, T)");
  std::string_view body_text = trim(line.substr(arrow + arrow_len));
  if (body_text.empty()) return reject(raw, RejectReason::EmptyBody, "rule body is empty");

  std::vector<Atom> body;
  for (auto piece : split(body_text, "&")) {
    for (auto sub : split(piece, "∧")) {
      auto atom = parse_atom(sub);
      if (!atom) {
        return reject(raw, RejectReason::MalformedAtom, "cannot parse body atom '" +
                                                            std::string(trim(sub)) + "'");
      }
      body.push_back(std::move(*atom));
    }
  }
  const std::size_t k = body.size();

  if (head->args[0] != "X" || head->args[1] != "Y") {
    return reject(raw, RejectReason::BadHeadArguments, "rule head must be over (X, Y, T)");
  }
  const auto head_t = time_index(head->args[2]);
  if (!head_t) return reject(raw, RejectReason::BadHeadArguments, "rule head time is not T or Tn");

  for (std::size_t i = 0; i < k; ++i) {
    const std::string subj = i == 0 ? "X" : "Z" + std::to_string(i);
    const std::string obj = i + 1 == k ? "Y" : "Z" + std::to_string(i + 1);
    if (body[i].args[0] != subj || body[i].args[1] != obj) {
      return reject(raw, RejectReason::BrokenChain,
                    "atom " + std::to_string(i + 1) + " must read (" + subj + ", " + obj + ", T" +
                        std::to_string(i + 1) + ")");
    }
    const auto t = time_index(body[i].args[2]);
    if (!t || *t != static_cast<int>(i + 1)) {
      return reject(raw, RejectReason::BadTimestamps,
                    "atom " + std::to_string(i + 1) + " must use T" + std::to_string(i + 1));
    }
  }
  if (*head_t != 0 && *head_t < static_cast<int>(k)) {
    return reject(raw, RejectReason::BadTimestamps, "rule head time precedes the body");
  }

  Rule rule;
  const auto head_id = catalog.find(head->name);
  if (!head_id) {
    return reject(raw, RejectReason::UnknownRelation, "unknown relation '" + std::string(head->name) + "'");
  }
  rule.head = *head_id;
  for (const Atom& a : body) {
    const auto id = catalog.find(a.name);
    if (!id) {
      return reject(raw, RejectReason::UnknownRelation, "unknown relation '" + std::string(a.name) + "'");
    }
    if (allowed && !allowed->contains(*id)) {
      return reject(raw, RejectReason::NotACandidate,
                    "'" + std::string(a.name) + "' is not among the candidate relations");
    }
    rule.body.push_back(*id);
  }
  return rule;
}

ParsedRules parse_rules(std::string_view text, const RelationCatalog& catalog,
                        const std::set<RelationId>* allowed) {
  ParsedRules out;
  for (auto line : split(text, "\n")) {
    if (trim(line).empty()) continue;
    auto parsed = parse_rule_line(line, catalog, allowed);
    if (auto* rule = std::get_if<Rule>(&parsed)) {
      out.accepted.push_back(std::move(*rule));
    } else {
      auto& rej = std::get<RejectedLine>(parsed);
      rej.line = std::string(trim(line));
      out.rejected.push_back(std::move(rej));
    }
  }
  return out;
}

}  // namespace llmda
