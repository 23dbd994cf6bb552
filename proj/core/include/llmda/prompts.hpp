#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace llmda {

/// Rule-generation prompt for `head` with the extracted rules (already in the
/// surface grammar) and the candidate body relations. Byte-stable per input.
std::string render_generation_prompt(std::string_view head, std::span<const std::string> sampled_rules,
                                     std::span<const std::string> candidates);

/// Dynamic-adaptation prompt. Returns nullopt when there are no low-quality
/// rules to update.
std::optional<std::string> render_adaptation_prompt(std::string_view head,
                                                    std::span<const std::string> low_rules,
                                                    std::span<const std::string> current_rules,
                                                    std::span<const std::string> candidates);

/// Deterministic stand-in answer for a rendered prompt: length-1 rules over the
/// first three candidates and one length-2 rule over the first two.
std::string candidate_echo_response(std::string_view prompt);

}  // namespace llmda
