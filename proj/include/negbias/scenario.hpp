#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "negbias/core.hpp"
#include "negbias/gateway.hpp"
#include "negbias/jsonl.hpp"

namespace negbias {

struct PromptBundle {
  std::vector<ChatMessage> messages;  // the first user turn
  std::string closing;                // CoT second user turn; empty without CoT
  QaFormat format = QaFormat::ynqa;
  ScenarioFlags scenario;
  // letter_map[k] is the meaning of option letter 'A' + k. Empty for YNQA.
  std::vector<Verdict> letter_map;
};

PromptBundle render_prompt(const EvalItem& item, QaFormat format, ScenarioFlags flags);

/// Verdict from the text after the last "Answer:" (the whole text when the
/// marker is missing). IDK verdicts become unparseable unless idk_allowed.
Verdict parse_answer(std::string_view text, QaFormat format, const std::vector<Verdict>& letter_map,
                     bool idk_allowed);

/// Request tag for one cell; the CoT first turn appends "-cot".
std::string run_tag(const std::string& item_id, QaFormat format, ScenarioFlags flags);

/// Provider failures become an unparseable record carrying the error text.
RunRecord run_item(const EvalItem& item, QaFormat format, ScenarioFlags flags, Gateway& target);

/// One record per (item, format, scenario), ordered item-major, then format,
/// then scenario, in the order given.
std::vector<RunRecord> run_evalset(const std::vector<EvalItem>& items,
                                   const std::vector<QaFormat>& formats,
                                   const std::vector<ScenarioFlags>& scenarios, Gateway& target);

jsonl::Json to_json(const RunRecord& r);
RunRecord record_from_json(const jsonl::Json& j, std::size_t line_no);

std::vector<RunRecord> load_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<RunRecord>& records);

}  // namespace negbias
