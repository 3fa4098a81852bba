#include "negbias/scenario.hpp"

#include <spdlog/spdlog.h>

#include "negbias/errors.hpp"
#include "negbias/evalset.hpp"
#include "negbias/parallel.hpp"
#include "negbias/probe.hpp"
#include "negbias/templates.hpp"
#include "negbias/text.hpp"

namespace negbias {
namespace {

std::vector<Verdict> binary_letter_map(int yes_index, bool with_idk) {
  std::vector<Verdict> map(2, Verdict::negative);
  map[static_cast<std::size_t>(yes_index)] = Verdict::positive;
  if (with_idk) map.push_back(Verdict::idk);
  return map;
}

}  // namespace

PromptBundle render_prompt(const EvalItem& item, QaFormat format, ScenarioFlags flags) {
  PromptBundle bundle;
  bundle.format = format;
  bundle.scenario = flags;

  templates::EvalPrompt prompt;
  switch (format) {
    case QaFormat::ynqa:
      prompt = templates::ynqa(item.ynqa_question, item.context, flags);
      break;
    case QaFormat::mcqa: {
      std::vector<std::string> options(item.mcqa_options.begin(), item.mcqa_options.end());
      if (flags.with_idk) options.emplace_back(templates::kUnanswerable);
      prompt = templates::mcqa(item.mcqa_question, options, item.context, flags);
      bundle.letter_map = binary_letter_map(item.mcqa_yes_index, flags.with_idk);
      break;
    }
    case QaFormat::ynmcqa: {
      const auto r = render_ynmcqa(item);
      std::vector<std::string> options(r.options.begin(), r.options.end());
      if (flags.with_idk) options.emplace_back(templates::kUnanswerable);
      prompt = templates::ynmcqa(r.question, options, item.context, flags);
      bundle.letter_map = binary_letter_map(item.ynmcqa_yes_index, flags.with_idk);
      break;
    }
  }
  bundle.messages.push_back({Role::user, std::move(prompt.first)});
  bundle.closing = std::move(prompt.second);
  return bundle;
}

Verdict parse_answer(std::string_view text, QaFormat format, const std::vector<Verdict>& letter_map,
                     bool idk_allowed) {
  Verdict v = Verdict::unparseable;
  if (format == QaFormat::ynqa) {
    const auto word = text::leading_word(text::after_last(text, templates::kAnswerCue));
    if (word == "yes") v = Verdict::positive;
    else if (word == "no") v = Verdict::negative;
    else if (word == "unanswerable") v = Verdict::idk;
  } else if (const auto letter = parse_option_letter(text, letter_map.size())) {
    v = letter_map[static_cast<std::size_t>(*letter - 'A')];
  }
  if (v == Verdict::idk && !idk_allowed) return Verdict::unparseable;
  return v;
}

std::string run_tag(const std::string& item_id, QaFormat format, ScenarioFlags flags) {
  return "run-" + item_id + "-" + std::string(to_string(format)) + "-" + scenario_id(flags);
}

RunRecord run_item(const EvalItem& item, QaFormat format, ScenarioFlags flags, Gateway& target) {
  RunRecord rec;
  rec.item_id = item.id;
  rec.format = format;
  rec.scenario = flags;
  rec.model = target.options().model;

  const PromptBundle bundle = render_prompt(item, format, flags);
  const std::string tag = run_tag(item.id, format, flags);
  try {
    auto messages = bundle.messages;
    if (flags.with_cot) {
      rec.cot_trace = target.ask(tag + "-cot", messages);
      messages.push_back({Role::assistant, rec.cot_trace});
      messages.push_back({Role::user, bundle.closing});
    }
    rec.raw_response = target.ask(tag, messages);
  } catch (const Error& e) {
    spdlog::warn("{}: {}", tag, e.what());
    rec.error = e.what();
    rec.verdict = Verdict::unparseable;
    return rec;
  }

  rec.verdict = parse_answer(rec.raw_response, format, bundle.letter_map, flags.with_idk);
  rec.correct = correctness(rec.verdict, item.polarity);
  return rec;
}

std::vector<RunRecord> run_evalset(const std::vector<EvalItem>& items,
                                   const std::vector<QaFormat>& formats,
                                   const std::vector<ScenarioFlags>& scenarios, Gateway& target) {
  const std::size_t per_item = formats.size() * scenarios.size();
  std::vector<RunRecord> out(items.size() * per_item);
  parallel_for(out.size(), target.concurrency(), [&](std::size_t k) {
    const auto& item = items[k / per_item];
    const auto format = formats[(k % per_item) / scenarios.size()];
    const auto flags = scenarios[k % scenarios.size()];
    out[k] = run_item(item, format, flags, target);
  });
  return out;
}

jsonl::Json to_json(const RunRecord& r) {
  jsonl::Json j;
  j["item_id"] = r.item_id;
  j["format"] = std::string(to_string(r.format));
  j["scenario"] = {{"context", r.scenario.with_context},
                   {"idk", r.scenario.with_idk},
                   {"cot", r.scenario.with_cot}};
  j["model"] = r.model;
  j["verdict"] = std::string(to_string(r.verdict));
  j["correct"] = r.correct ? jsonl::Json(*r.correct) : jsonl::Json(nullptr);
  j["raw_response"] = r.raw_response;
  j["cot_trace"] = r.cot_trace;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

RunRecord record_from_json(const jsonl::Json& j, std::size_t line_no) try {
  RunRecord r;
  r.item_id = jsonl::get_string(j, "item_id", line_no);
  const auto format = parse_format(jsonl::get_string(j, "format", line_no));
  if (!format) throw MalformedLine(line_no, "bad format");
  r.format = *format;
  const auto& s = j.at("scenario");
  r.scenario = {jsonl::get_bool(s, "context", line_no), jsonl::get_bool(s, "idk", line_no),
                jsonl::get_bool(s, "cot", line_no)};
  r.model = jsonl::get_string(j, "model", line_no);
  const auto verdict = parse_verdict(jsonl::get_string(j, "verdict", line_no));
  if (!verdict) throw MalformedLine(line_no, "bad verdict");
  r.verdict = *verdict;
  if (const auto& c = j.at("correct"); !c.is_null()) r.correct = c.get<bool>();
  if (r.correct.has_value() != is_scorable(r.verdict)) {
    throw MalformedLine(line_no, "correct must be present exactly for positive/negative verdicts");
  }
  r.raw_response = jsonl::get_string(j, "raw_response", line_no);
  r.cot_trace = jsonl::get_string(j, "cot_trace", line_no);
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  return r;
} catch (const nlohmann::json::exception& e) {
  throw MalformedLine(line_no, e.what());
}

std::vector<RunRecord> load_records(const std::filesystem::path& path) {
  std::vector<RunRecord> records;
  jsonl::for_each(path, [&](const jsonl::Json& j, std::size_t line_no) {
    records.push_back(record_from_json(j, line_no));
  });
  return records;
}

void write_records(const std::filesystem::path& path, const std::vector<RunRecord>& records) {
  std::vector<jsonl::Json> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(to_json(r));
  jsonl::write(path, out);
}

}  // namespace negbias
