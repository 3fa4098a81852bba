#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "negbias/core.hpp"
#include "negbias/gateway.hpp"
#include "negbias/jsonl.hpp"

namespace negbias {

struct StatementPair {
  std::string statement;
  std::string negation;
  std::string source_question;

  friend bool operator==(const StatementPair&, const StatementPair&) = default;
};

/// Semantic meaning of a probing option.
enum class ProbeChoice : std::uint8_t { statement, negation, idk };

std::string_view to_string(ProbeChoice c);

/// permutation[position] = index of the option shown at that position,
/// options being {statement, negation, "I don't know"}.
using Permutation = std::array<int, 3>;

struct ProbeTrial {
  Permutation permutation{0, 1, 2};
  std::optional<char> letter;        // nullopt when the reply had no usable letter
  std::optional<ProbeChoice> choice;  // letter mapped back through the permutation

  friend bool operator==(const ProbeTrial&, const ProbeTrial&) = default;
};

struct ProbeResult {
  std::string sample_id;
  SampleKind kind = SampleKind::yesno;
  std::vector<ProbeTrial> trials;        // yes-no only, always three
  std::optional<StatementPair> pair;     // yes-no only
  std::optional<std::string> prediction;  // short-answer only
  std::optional<bool> judge_verdict;      // short-answer, set by categorization
  std::optional<KnowledgeState> state;
  bool consistent = false;
  std::string error;  // gateway/judge failure for this sample

  /// The common choice of a consistent yes-no probe.
  [[nodiscard]] std::optional<ProbeChoice> agreed_choice() const;
  /// Short-answer prediction equals "Unanswerable" (case-insensitive).
  [[nodiscard]] bool is_idk() const;

  friend bool operator==(const ProbeResult&, const ProbeResult&) = default;
};

/// Asks the judge to convert a yes-no question into a statement and its
/// opposite. Throws JudgeParseError if either line is missing or they agree.
StatementPair make_statement_pair(const std::string& question, Gateway& judge,
                                  const std::string& tag);

/// Seeded, uniformly drawn permutation for one trial; trials are independent.
Permutation shuffle_options(std::uint64_t seed, const std::string& sample_id, int trial);

/// Letter picked in a multiple-choice reply: the first "(X)" after the last
/// "Answer:", else a bare leading letter. Only letters < 'A' + n_options count.
std::optional<char> parse_option_letter(std::string_view reply, std::size_t n_options);

/// Three shuffled two-turn CoT trials against the target model.
ProbeResult probe_yesno(const Sample& sample, const StatementPair& pair, Gateway& target,
                        std::uint64_t seed);

/// Two-turn CoT short-answer probe; prediction is the text after the final
/// "Answer:" marker (the whole reply when the marker is missing).
ProbeResult probe_short(const Sample& sample, Gateway& target);

/// Exact normalized match, otherwise the judge's leading Yes/No.
bool verify_short_answer(const std::string& question, const std::string& prediction,
                         const std::string& gold, Gateway& judge, const std::string& tag);

/// Knowledge state for a finished probe. Short-answer results must already
/// carry judge_verdict unless the prediction is the IDK outcome.
KnowledgeState categorize(const ProbeResult& result, const std::string& gold);

jsonl::Json to_json(const ProbeResult& r);
ProbeResult probe_from_json(const jsonl::Json& j, std::size_t line_no);

}  // namespace negbias
