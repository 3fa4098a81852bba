#include "negbias/core.hpp"

namespace negbias {

std::string scenario_id(ScenarioFlags flags) {
  std::string id = flags.with_context ? "ctx" : "noctx";
  if (flags.with_idk) id += "+idk";
  if (flags.with_cot) id += "+cot";
  return id;
}

std::optional<ScenarioFlags> parse_scenario_id(std::string_view id) {
  for (int i = 0; i < 8; ++i) {
    auto flags = ScenarioFlags::from_index(i);
    if (scenario_id(flags) == id) return flags;
  }
  return std::nullopt;
}

std::optional<std::string> check_item(const EvalItem& item) {
  if (item.id.empty()) return "empty id";
  for (int idx : {item.mcqa_correct_index, item.mcqa_yes_index, item.ynmcqa_yes_index}) {
    if (idx != 0 && idx != 1) return "option index out of range";
  }
  if (item.mcqa_options[0].empty() || item.mcqa_options[1].empty()) return "empty MCQA option";
  if (item.mcqa_options[0] == item.mcqa_options[1]) return "MCQA options are identical";
  if (item.polarity != item.ynqa_label) return "polarity differs from YNQA label";
  const bool aligned = item.mcqa_correct_index == item.mcqa_yes_index;
  if (aligned != (item.polarity == Polarity::positive)) {
    return "MCQA correct option is not aligned with polarity";
  }
  return std::nullopt;
}

std::optional<bool> correctness(Verdict verdict, Polarity gold) {
  if (!is_scorable(verdict)) return std::nullopt;
  return (verdict == Verdict::positive) == (gold == Polarity::positive);
}

std::string_view to_string(SampleKind v) {
  return v == SampleKind::yesno ? "yesno" : "short";
}

std::string_view to_string(KnowledgeState v) {
  switch (v) {
    case KnowledgeState::parametric: return "parametric";
    case KnowledgeState::counter_parametric: return "counter_parametric";
    case KnowledgeState::absent: return "absent";
  }
  return "?";
}

std::string_view to_string(Polarity v) {
  return v == Polarity::positive ? "positive" : "negative";
}

std::string_view to_string(QaFormat v) {
  switch (v) {
    case QaFormat::mcqa: return "mcqa";
    case QaFormat::ynqa: return "ynqa";
    case QaFormat::ynmcqa: return "ynmcqa";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::positive: return "positive";
    case Verdict::negative: return "negative";
    case Verdict::idk: return "idk";
    case Verdict::unparseable: return "unparseable";
  }
  return "?";
}

std::optional<SampleKind> parse_kind(std::string_view s) {
  if (s == "yesno") return SampleKind::yesno;
  if (s == "short") return SampleKind::short_answer;
  return std::nullopt;
}

std::optional<KnowledgeState> parse_state(std::string_view s) {
  for (auto st : kAllStates) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::optional<Polarity> parse_polarity(std::string_view s) {
  if (s == "positive") return Polarity::positive;
  if (s == "negative") return Polarity::negative;
  return std::nullopt;
}

std::optional<QaFormat> parse_format(std::string_view s) {
  for (auto f : kAllFormats) {
    if (to_string(f) == s) return f;
  }
  return std::nullopt;
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  for (auto v : {Verdict::positive, Verdict::negative, Verdict::idk, Verdict::unparseable}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

}  // namespace negbias
