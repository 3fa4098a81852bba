#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "negbias/core.hpp"
#include "negbias/gateway.hpp"
#include "negbias/jsonl.hpp"
#include "negbias/probe.hpp"

namespace negbias {

struct GeneratedNegatives {
  std::string wrong_answer;
  std::string yes_question;
  std::string no_question;
  int attempts = 1;
};

struct WrongAnswer {
  std::string text;
  int attempts = 1;
};

/// Asks the judge for a contaminated answer until the label differs
/// (normalized) from both the gold answer and the model's own prediction.
/// Attempts after the first run at `retry_temperature`.
/// Throws ExhaustedAttempts after `max_attempts` rejected candidates.
WrongAnswer gen_wrong_answer(const Sample& sample, const std::string& model_prediction,
                             Gateway& judge, int max_attempts = 5,
                             double retry_temperature = 1.0);

/// Judge-written (Yes-Question, No-Question) pair.
std::pair<std::string, std::string> gen_yesno_questions(const std::string& question,
                                                        const std::string& correct,
                                                        const std::string& wrong, Gateway& judge,
                                                        const std::string& tag);

GeneratedNegatives generate_negatives(const Sample& sample, const std::string& model_prediction,
                                      Gateway& judge, int max_attempts = 5,
                                      double retry_temperature = 1.0);

/// MCQA options are the statement pair in seeded order; YNQA keeps the
/// original question and label.
EvalItem build_item_yesno(const Sample& sample, const StatementPair& pair, KnowledgeState state,
                          std::uint64_t seed);

/// MCQA options are {gold, wrong} in seeded order; the YNQA question is the
/// judge's Yes-Question for positives and No-Question for negatives.
EvalItem build_item_short(const Sample& sample, const GeneratedNegatives& negs,
                          KnowledgeState state, Polarity polarity, std::uint64_t seed);

/// Seeded down-sampling of the larger polarity within every (dataset, subset)
/// cell. Kept items retain their input order.
std::vector<EvalItem> balance_polarity(const std::vector<EvalItem>& items, std::uint64_t seed);

struct YnmcqaRendering {
  std::string question;
  std::array<std::string, 2> options;  // "Yes"/"No" placed by ynmcqa_yes_index
};

YnmcqaRendering render_ynmcqa(const EvalItem& item);

jsonl::Json to_json(const EvalItem& item);
EvalItem item_from_json(const jsonl::Json& j, std::size_t line_no);

std::vector<EvalItem> load_evalset(const std::filesystem::path& path);
void write_evalset(const std::filesystem::path& path, const std::vector<EvalItem>& items);

}  // namespace negbias
