#include "negbias/evalset.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "negbias/errors.hpp"
#include "negbias/rng.hpp"
#include "negbias/templates.hpp"
#include "negbias/text.hpp"

namespace negbias {
namespace {

std::string clean_label(std::string_view reply) {
  std::string_view v = text::trim(text::after_last(reply, "Contaminated answer:"));
  v = v.substr(0, v.find('\n'));
  v = text::trim(v);
  while (!v.empty() && v.back() == '.') v.remove_suffix(1);
  return std::string(text::trim(v));
}

int seeded_bit(std::uint64_t seed, std::string_view purpose, const std::string& id) {
  SeededStream rng(seed, purpose, id);
  return static_cast<int>(rng.below(2));
}

}  // namespace

WrongAnswer gen_wrong_answer(const Sample& sample, const std::string& model_prediction,
                             Gateway& judge, int max_attempts, double retry_temperature) {
  if (sample.kind != SampleKind::short_answer) {
    throw std::invalid_argument("gen_wrong_answer needs a short-answer sample");
  }
  const auto gold = text::normalize_answer(sample.answer);
  const auto predicted = text::normalize_answer(model_prediction);
  const std::string prompt = templates::wrong_answer(sample.question, sample.context, sample.answer);

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    const auto temperature = attempt == 1 ? std::optional<double>{} : retry_temperature;
    const std::string reply = judge.ask("wrong-" + sample.id + "-a" + std::to_string(attempt),
                                        {{Role::user, prompt}}, temperature);
    std::string candidate = clean_label(reply);
    const auto norm = text::normalize_answer(candidate);
    if (!norm.empty() && norm != gold && norm != predicted) {
      return {std::move(candidate), attempt};
    }
    spdlog::debug("{}: rejected wrong-answer candidate '{}' on attempt {}", sample.id, candidate,
                  attempt);
  }
  throw ExhaustedAttempts(sample.id, max_attempts);
}

std::pair<std::string, std::string> gen_yesno_questions(const std::string& question,
                                                        const std::string& correct,
                                                        const std::string& wrong, Gateway& judge,
                                                        const std::string& tag) {
  if (text::normalize_answer(correct) == text::normalize_answer(wrong)) {
    throw std::invalid_argument("correct and wrong answers coincide");
  }
  const std::string reply =
      judge.ask(tag, {{Role::user, templates::binary_conversion(question, correct, wrong)}});
  bool has_yes = false;
  bool has_no = false;
  auto yes_q = text::line_value(reply, "Yes-Question:", &has_yes);
  auto no_q = text::line_value(reply, "No-Question:", &has_no);
  if (!has_yes || !has_no || yes_q.empty() || no_q.empty()) {
    throw JudgeParseError("binary conversion reply lacks a Yes-Question:/No-Question: line");
  }
  return {std::move(yes_q), std::move(no_q)};
}

GeneratedNegatives generate_negatives(const Sample& sample, const std::string& model_prediction,
                                      Gateway& judge, int max_attempts,
                                      double retry_temperature) {
  auto wrong = gen_wrong_answer(sample, model_prediction, judge, max_attempts, retry_temperature);
  auto [yes_q, no_q] =
      gen_yesno_questions(sample.question, sample.answer, wrong.text, judge, "ynq-" + sample.id);
  return {std::move(wrong.text), std::move(yes_q), std::move(no_q), wrong.attempts};
}

EvalItem build_item_yesno(const Sample& sample, const StatementPair& pair, KnowledgeState state,
                          std::uint64_t seed) {
  if (sample.kind != SampleKind::yesno) {
    throw std::invalid_argument("build_item_yesno needs a yes-no sample");
  }
  const int statement_at = seeded_bit(seed, "mcqa-order", sample.id);

  EvalItem item;
  item.id = sample.id;
  item.dataset = sample.dataset;
  item.subset = state;
  item.polarity = sample.answer == "yes" ? Polarity::positive : Polarity::negative;
  item.context = sample.context;
  item.mcqa_question = sample.question;
  item.mcqa_options[static_cast<std::size_t>(statement_at)] = pair.statement;
  item.mcqa_options[static_cast<std::size_t>(1 - statement_at)] = pair.negation;
  item.mcqa_yes_index = statement_at;
  item.mcqa_correct_index = item.polarity == Polarity::positive ? statement_at : 1 - statement_at;
  item.ynqa_question = sample.question;
  item.ynqa_label = item.polarity;
  item.ynmcqa_yes_index = seeded_bit(seed, "ynmcqa-order", sample.id);
  return item;
}

EvalItem build_item_short(const Sample& sample, const GeneratedNegatives& negs,
                          KnowledgeState state, Polarity polarity, std::uint64_t seed) {
  if (sample.kind != SampleKind::short_answer) {
    throw std::invalid_argument("build_item_short needs a short-answer sample");
  }
  const int gold_at = seeded_bit(seed, "mcqa-order", sample.id);

  EvalItem item;
  item.id = sample.id;
  item.dataset = sample.dataset;
  item.subset = state;
  item.polarity = polarity;
  item.context = sample.context;
  item.mcqa_question = sample.question;
  item.mcqa_options[static_cast<std::size_t>(gold_at)] = sample.answer;
  item.mcqa_options[static_cast<std::size_t>(1 - gold_at)] = negs.wrong_answer;
  item.mcqa_correct_index = gold_at;
  item.mcqa_yes_index = polarity == Polarity::positive ? gold_at : 1 - gold_at;
  item.ynqa_question = polarity == Polarity::positive ? negs.yes_question : negs.no_question;
  item.ynqa_label = polarity;
  item.ynmcqa_yes_index = seeded_bit(seed, "ynmcqa-order", sample.id);
  return item;
}

std::vector<EvalItem> balance_polarity(const std::vector<EvalItem>& items, std::uint64_t seed) {
  // (dataset, subset) -> indices per polarity
  std::map<std::pair<std::string, KnowledgeState>, std::array<std::vector<std::size_t>, 2>> cells;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    cells[{it.dataset, it.subset}][it.polarity == Polarity::positive ? 0 : 1].push_back(i);
  }

  std::vector<bool> keep(items.size(), false);
  for (auto& [cell, sides] : cells) {
    const std::size_t target = std::min(sides[0].size(), sides[1].size());
    if (target == 0) {
      spdlog::warn("{}/{}: one polarity is empty; the cell is dropped", cell.first,
                   to_string(cell.second));
    }
    for (std::size_t s = 0; s < 2; ++s) {
      auto& idx = sides[s];
      if (idx.size() > target) {
        SeededStream rng(seed, "balance-polarity",
                         cell.first + "/" + std::string(to_string(cell.second)), s);
        rng.shuffle(std::span<std::size_t>(idx));
      }
      for (std::size_t k = 0; k < target; ++k) keep[idx[k]] = true;
    }
  }

  std::vector<EvalItem> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (keep[i]) out.push_back(items[i]);
  }
  return out;
}

YnmcqaRendering render_ynmcqa(const EvalItem& item) {
  YnmcqaRendering r;
  r.question = item.ynqa_question;
  const auto yes = static_cast<std::size_t>(item.ynmcqa_yes_index);
  r.options[yes] = "Yes";
  r.options[1 - yes] = "No";
  return r;
}

jsonl::Json to_json(const EvalItem& item) {
  jsonl::Json j;
  j["id"] = item.id;
  j["dataset"] = item.dataset;
  j["subset"] = std::string(to_string(item.subset));
  j["polarity"] = std::string(to_string(item.polarity));
  j["context"] = item.context;
  j["mcqa"] = {{"question", item.mcqa_question},
               {"options", item.mcqa_options},
               {"correct_index", item.mcqa_correct_index},
               {"yes_index", item.mcqa_yes_index}};
  j["ynqa"] = {{"question", item.ynqa_question},
               {"label", item.ynqa_label == Polarity::positive ? "yes" : "no"}};
  j["ynmcqa"] = {{"yes_index", item.ynmcqa_yes_index}};
  return j;
}

EvalItem item_from_json(const jsonl::Json& j, std::size_t line_no) try {
  EvalItem item;
  item.id = jsonl::get_string(j, "id", line_no);
  item.dataset = jsonl::get_string(j, "dataset", line_no);
  const auto subset = parse_state(jsonl::get_string(j, "subset", line_no));
  const auto polarity = parse_polarity(jsonl::get_string(j, "polarity", line_no));
  if (!subset || !polarity) throw MalformedLine(line_no, "bad subset or polarity");
  item.subset = *subset;
  item.polarity = *polarity;
  item.context = jsonl::get_string(j, "context", line_no);

  const auto& m = j.at("mcqa");
  item.mcqa_question = jsonl::get_string(m, "question", line_no);
  item.mcqa_options = m.at("options").get<std::array<std::string, 2>>();
  item.mcqa_correct_index = jsonl::get_int(m, "correct_index", line_no);
  item.mcqa_yes_index = jsonl::get_int(m, "yes_index", line_no);

  const auto& y = j.at("ynqa");
  item.ynqa_question = jsonl::get_string(y, "question", line_no);
  const auto label = jsonl::get_string(y, "label", line_no);
  if (label != "yes" && label != "no") throw MalformedLine(line_no, "ynqa label must be yes/no");
  item.ynqa_label = label == "yes" ? Polarity::positive : Polarity::negative;

  item.ynmcqa_yes_index = jsonl::get_int(j.at("ynmcqa"), "yes_index", line_no);

  if (auto problem = check_item(item)) throw MalformedLine(line_no, *problem);
  return item;
} catch (const nlohmann::json::exception& e) {
  throw MalformedLine(line_no, e.what());
}

std::vector<EvalItem> load_evalset(const std::filesystem::path& path) {
  std::vector<EvalItem> items;
  std::unordered_set<std::string> seen;
  jsonl::for_each(path, [&](const jsonl::Json& j, std::size_t line_no) {
    auto item = item_from_json(j, line_no);
    if (!seen.insert(item.id).second) throw DuplicateId(item.id);
    items.push_back(std::move(item));
  });
  return items;
}

void write_evalset(const std::filesystem::path& path, const std::vector<EvalItem>& items) {
  std::vector<jsonl::Json> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(to_json(item));
  jsonl::write(path, out);
}

}  // namespace negbias
