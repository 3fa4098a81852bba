#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace negbias {

enum class SampleKind : std::uint8_t { yesno, short_answer };

enum class KnowledgeState : std::uint8_t { parametric, counter_parametric, absent };

/// Positive means the gold label of the binary question is Yes.
enum class Polarity : std::uint8_t { positive, negative };

enum class QaFormat : std::uint8_t { mcqa, ynqa, ynmcqa };

enum class Verdict : std::uint8_t { positive, negative, idk, unparseable };

inline constexpr std::array<QaFormat, 3> kAllFormats{QaFormat::mcqa, QaFormat::ynqa,
                                                     QaFormat::ynmcqa};
inline constexpr std::array<KnowledgeState, 3> kAllStates{
    KnowledgeState::parametric, KnowledgeState::counter_parametric, KnowledgeState::absent};

struct ScenarioFlags {
  bool with_context = false;
  bool with_idk = false;
  bool with_cot = false;

  friend bool operator==(const ScenarioFlags&, const ScenarioFlags&) = default;

  /// Dense index in [0, 8): context is bit 2, idk bit 1, cot bit 0.
  [[nodiscard]] constexpr int index() const {
    return (with_context ? 4 : 0) | (with_idk ? 2 : 0) | (with_cot ? 1 : 0);
  }
  [[nodiscard]] static constexpr ScenarioFlags from_index(int i) {
    return {(i & 4) != 0, (i & 2) != 0, (i & 1) != 0};
  }
};

/// Canonical id: "ctx"/"noctx", then "+idk", then "+cot".
std::string scenario_id(ScenarioFlags flags);

/// Inverse of scenario_id; nullopt for anything that is not a canonical id.
std::optional<ScenarioFlags> parse_scenario_id(std::string_view id);

struct Sample {
  std::string id;
  std::string dataset;
  SampleKind kind = SampleKind::yesno;
  std::string question;
  std::string answer;  // "yes"/"no" for yes-no samples
  std::string context;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// One knowledge-categorized, polarity-labeled item with its three renderings.
struct EvalItem {
  std::string id;
  std::string dataset;
  KnowledgeState subset = KnowledgeState::parametric;
  Polarity polarity = Polarity::positive;
  std::string context;

  std::string mcqa_question;
  std::array<std::string, 2> mcqa_options;
  int mcqa_correct_index = 0;
  // Index of the option that asserts the Yes-side proposition of ynqa_question.
  int mcqa_yes_index = 0;

  std::string ynqa_question;
  Polarity ynqa_label = Polarity::positive;

  int ynmcqa_yes_index = 0;

  friend bool operator==(const EvalItem&, const EvalItem&) = default;
};

/// Checks the EvalItem alignment invariants; returns a description of the
/// first violation or nullopt.
std::optional<std::string> check_item(const EvalItem& item);

struct RunRecord {
  std::string item_id;
  QaFormat format = QaFormat::ynqa;
  ScenarioFlags scenario;
  std::string raw_response;
  std::string cot_trace;
  Verdict verdict = Verdict::unparseable;
  std::optional<bool> correct;
  std::string model;
  std::string error;  // set only when a gateway failure produced the record

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Fills `correct` from the verdict and the gold polarity.
std::optional<bool> correctness(Verdict verdict, Polarity gold);

[[nodiscard]] constexpr bool is_scorable(Verdict v) {
  return v == Verdict::positive || v == Verdict::negative;
}

[[nodiscard]] constexpr Polarity flip(Polarity p) {
  return p == Polarity::positive ? Polarity::negative : Polarity::positive;
}

std::string_view to_string(SampleKind v);
std::string_view to_string(KnowledgeState v);
std::string_view to_string(Polarity v);
std::string_view to_string(QaFormat v);
std::string_view to_string(Verdict v);

std::optional<SampleKind> parse_kind(std::string_view s);
std::optional<KnowledgeState> parse_state(std::string_view s);
std::optional<Polarity> parse_polarity(std::string_view s);
std::optional<QaFormat> parse_format(std::string_view s);
std::optional<Verdict> parse_verdict(std::string_view s);

}  // namespace negbias
