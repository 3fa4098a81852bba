#include "negbias/templates.hpp"

#include <fmt/format.h>

namespace negbias::templates {

std::string option_lines(std::span<const std::string> options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i > 0) out += '\n';
    out += fmt::format("({}) {}", letter(i), options[i]);
  }
  return out;
}

std::string option_inline(std::span<const std::string> options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i > 0) out += ' ';
    out += fmt::format("({}) {}", letter(i), options[i]);
  }
  return out;
}

std::string letter_choices(std::size_t n) {
  if (n == 2) return "\"(A)\" or \"(B)\"";
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += (i + 1 == n) ? ", or " : ", ";
    out += fmt::format("\"({})\"", letter(i));
  }
  return out;
}

std::string probe_yesno_first(std::span<const std::string> options) {
  return fmt::format(
      "Your role is to select the correct statement among the two statements according to your "
      "knowledge. If you don't know which statement is correct, choose the option corresponding "
      "to \"{}\".\n"
      "Please simply answer with {}.\n"
      "{}\n"
      "{}",
      kIdkOption, letter_choices(options.size()), option_lines(options), kCotCue);
}

std::string probe_yesno_second() {
  return fmt::format("Return only the answer with {} after 'Answer:'", letter_choices(3));
}

std::string probe_short_first(std::string_view question) {
  return fmt::format(
      "Answer the question. Write only the answer in a few words after 'Answer:'.\n"
      "If you cannot answer the question, please answer with \"{}\".\n"
      "Question: {}\n"
      "{}",
      kUnanswerable, question, kCotCue);
}

std::string probe_short_second() {
  return fmt::format("Return only the answer in a few words or \"{}\" after 'Answer:'.",
                     kUnanswerable);
}

std::string statement_conversion(std::string_view question) {
  return fmt::format(
      "Convert the given question into a statement and then rewrite the statement to express the "
      "exact opposite meaning. Do not omit any information in the given question.\n"
      "\n"
      "[Example (begin)]\n"
      "Question: Would the top of Mount Fuji stick out of the Sea of Japan?\n"
      "Statement: The top of Mount Fuji would stick out of the Sea of Japan.\n"
      "Opposite: The top of Mount Fuji would sink in the Sea of Japan.\n"
      "\n"
      "Question: Is there a warthog on Broadway?\n"
      "Statement: There is a warthog on Broadway.\n"
      "Opposite: There is no warthog on Broadway.\n"
      "\n"
      "Question: Could someone with fine motor control issues benefit from an altered keyboard "
      "layout?\n"
      "Statement: Someone with fine motor control issues could benefit from an altered keyboard "
      "layout.\n"
      "Opposite: No one with fine motor control issues could benefit from an altered keyboard "
      "layout.\n"
      "[Example (end)]\n"
      "[Input]\n"
      "Question: {}",
      question);
}

std::string wrong_answer(std::string_view question, std::string_view context,
                         std::string_view ground_truth) {
  return fmt::format(
      "Using the Context, contaminate the Answer to be wrong for the given Question.\n"
      "Question: {}\n"
      "Context: {}\n"
      "Answer: {}\n"
      "Contaminated answer:",
      question, context, ground_truth);
}

std::string binary_conversion(std::string_view question, std::string_view correct,
                              std::string_view wrong) {
  return fmt::format(
      "Given a question, a correct answer, and a wrong answer, write a pair of questions where "
      "the answer is 'Yes' (Yes-Question) and 'No' (No-Question). Do not omit any information in "
      "the given question.\n"
      "\n"
      "[Examples (begin)]\n"
      "[Input]\n"
      "Question: Which country the director of film Hotel By The Hour is from?\n"
      "Correct Answer: Austria\n"
      "Wrong Answer: United States\n"
      "[Output]\n"
      "Yes-Question: Is the director of film Hotel By The Hour from Austria?\n"
      "No-Question: Is the director of film Hotel By The Hour from United States?\n"
      "\n"
      "[Input]\n"
      "Question: Which film has the director born later, Life Hits or It'S In The Air?\n"
      "Correct Answer: Life Hits\n"
      "Wrong Answer: It'S In The Air\n"
      "[Output]\n"
      "Yes-Question: Is the director of Life Hits born later than the director of It's In The "
      "Air?\n"
      "No-Question: Is the director of It's In The Air born later than the director of Life "
      "Hits?\n"
      "\n"
      "[Input]\n"
      "Question: A country's military branch, which in the US contains the Air Defense "
      "Artillery, was unprepared for the invasion of Hana Mandlikova's birth country. When was "
      "the word \"Slavs\" used in the national anthem of the unprepared country?\n"
      "Correct Answer: 1943-1992\n"
      "Wrong Answer: 1968-2003\n"
      "[Output]\n"
      "Yes-Question: A country's military branch, which in the US contains the Air Defense "
      "Artillery, was unprepared for the invasion of Hana Mandlikova's birth country. Was the "
      "word \"Slavs\" used in the national anthem of the unprepared country from 1943 to 1992?\n"
      "No-Question: A country's military branch, which in the US contains the Air Defense "
      "Artillery, was unprepared for the invasion of Hana Mandlikova's birth country. Was the "
      "word \"Slavs\" used in the national anthem of the unprepared country from 1968 to 2003?\n"
      "[Examples (end)]\n"
      "[Input]\n"
      "Question: {}\n"
      "Correct Answer: {}\n"
      "Wrong Answer: {}\n"
      "[Output]",
      question, correct, wrong);
}

std::string verify_answer(std::string_view question, std::string_view prediction,
                          std::string_view ground_truth) {
  return fmt::format(
      "Decide whether the prediction is consistent with the ground truth answer to the "
      "question. Reply with Yes or No only.\n"
      "Question: {}\n"
      "Ground truth: {}\n"
      "Prediction: {}",
      question, ground_truth, prediction);
}

namespace {

std::string context_clause(ScenarioFlags flags) {
  return flags.with_context ? " and the given context" : "";
}

std::string context_block(std::string_view context, ScenarioFlags flags) {
  return flags.with_context ? fmt::format("Context: {}\n", context) : std::string{};
}

std::string closing(ScenarioFlags flags) {
  return std::string(flags.with_cot ? kCotCue : kAnswerCue);
}

std::string choice_second_turn(std::size_t n_options, ScenarioFlags flags) {
  if (!flags.with_cot) return {};
  return fmt::format("Return only the answer with {} after 'Answer:'.", letter_choices(n_options));
}

std::string choice_idk_sentence(ScenarioFlags flags) {
  if (!flags.with_idk) return {};
  return fmt::format(
      " If you don't know which option is correct, choose the option corresponding to \"{}\".",
      kUnanswerable);
}

}  // namespace

EvalPrompt ynqa(std::string_view question, std::string_view context, ScenarioFlags flags) {
  EvalPrompt p;
  p.first = fmt::format(
      "You are given a question and you MUST answer with Yes or No based on your knowledge{}."
      "{}\n"
      "{}"
      "Question: {}\n"
      "{}",
      context_clause(flags),
      flags.with_idk ? " If you don't know the answer, please respond with 'Answer: Unanswerable'."
                     : "",
      context_block(context, flags), question, closing(flags));
  if (flags.with_cot) {
    p.second = flags.with_idk
                   ? "Return only the answer with Yes, No, or Unanswerable after 'Answer:'."
                   : "Return only the answer with Yes or No after 'Answer:'.";
  }
  return p;
}

EvalPrompt mcqa(std::string_view question, std::span<const std::string> options,
                std::string_view context, ScenarioFlags flags) {
  EvalPrompt p;
  p.first = fmt::format(
      "Your role is to select the correct option among the two options according to your "
      "knowledge{}.{}\n"
      "Please simply answer with {}.\n"
      "{}"
      "Question: {}\n"
      "Options:\n"
      "{}\n"
      "{}",
      context_clause(flags), choice_idk_sentence(flags), letter_choices(options.size()),
      context_block(context, flags), question, option_lines(options), closing(flags));
  p.second = choice_second_turn(options.size(), flags);
  return p;
}

EvalPrompt ynmcqa(std::string_view question, std::span<const std::string> options,
                  std::string_view context, ScenarioFlags flags) {
  EvalPrompt p;
  p.first = fmt::format(
      "Your role is to answer the question by selecting the correct option according to your "
      "knowledge{}.{}\n"
      "Please simply answer with {}.\n"
      "{}"
      "Question: {}\n"
      "Options: {}\n"
      "{}",
      context_clause(flags), choice_idk_sentence(flags), letter_choices(options.size()),
      context_block(context, flags), question, option_inline(options), closing(flags));
  p.second = choice_second_turn(options.size(), flags);
  return p;
}

}  // namespace negbias::templates
