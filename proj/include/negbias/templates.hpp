#pragma once

#include <span>
#include <string>
#include <string_view>

#include "negbias/core.hpp"

// Every prompt string the toolkit sends lives here.

namespace negbias::templates {

inline constexpr std::string_view kCotCue = "Let's think step by step.";
inline constexpr std::string_view kAnswerCue = "Answer:";
inline constexpr std::string_view kIdkOption = "I don't know";
inline constexpr std::string_view kUnanswerable = "Unanswerable";

/// Option letter for a 0-based position: 0 -> 'A'.
constexpr char letter(std::size_t position) { return static_cast<char>('A' + position); }

/// "(A) first\n(B) second..." one option per line.
std::string option_lines(std::span<const std::string> options);

/// "(A) first (B) second..." on one line.
std::string option_inline(std::span<const std::string> options);

/// "\"(A)\" or \"(B)\"" / "\"(A)\", \"(B)\", or \"(C)\"".
std::string letter_choices(std::size_t n);

// -- knowledge probing -------------------------------------------------------

std::string probe_yesno_first(std::span<const std::string> options);
std::string probe_yesno_second();
std::string probe_short_first(std::string_view question);
std::string probe_short_second();

// -- judge-side generation ---------------------------------------------------

std::string statement_conversion(std::string_view question);
std::string wrong_answer(std::string_view question, std::string_view context,
                         std::string_view ground_truth);
std::string binary_conversion(std::string_view question, std::string_view correct,
                              std::string_view wrong);
std::string verify_answer(std::string_view question, std::string_view prediction,
                          std::string_view ground_truth);

// -- evaluation --------------------------------------------------------------

struct EvalPrompt {
  std::string first;   // first user turn
  std::string second;  // closing user turn for CoT; empty otherwise
};

EvalPrompt ynqa(std::string_view question, std::string_view context, ScenarioFlags flags);

/// `options` already includes the trailing Unanswerable option when flags.with_idk.
EvalPrompt mcqa(std::string_view question, std::span<const std::string> options,
                std::string_view context, ScenarioFlags flags);
EvalPrompt ynmcqa(std::string_view question, std::span<const std::string> options,
                  std::string_view context, ScenarioFlags flags);

}  // namespace negbias::templates
