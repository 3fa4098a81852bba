#include "negbias/probe.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "negbias/errors.hpp"
#include "negbias/rng.hpp"
#include "negbias/templates.hpp"
#include "negbias/text.hpp"

namespace negbias {

std::string_view to_string(ProbeChoice c) {
  switch (c) {
    case ProbeChoice::statement: return "statement";
    case ProbeChoice::negation: return "negation";
    case ProbeChoice::idk: return "idk";
  }
  return "?";
}

namespace {

std::optional<ProbeChoice> parse_choice(std::string_view s) {
  for (auto c : {ProbeChoice::statement, ProbeChoice::negation, ProbeChoice::idk}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

bool is_unanswerable(std::string_view s) { return text::normalize_answer(s) == "unanswerable"; }

}  // namespace

std::optional<ProbeChoice> ProbeResult::agreed_choice() const {
  if (kind != SampleKind::yesno || !consistent || trials.empty()) return std::nullopt;
  return trials.front().choice;
}

bool ProbeResult::is_idk() const { return prediction.has_value() && is_unanswerable(*prediction); }

StatementPair make_statement_pair(const std::string& question, Gateway& judge,
                                  const std::string& tag) {
  if (question.empty()) throw std::invalid_argument("empty question");
  const std::string reply =
      judge.ask(tag, {{Role::user, templates::statement_conversion(question)}});
  bool has_statement = false;
  bool has_opposite = false;
  StatementPair pair{text::line_value(reply, "Statement:", &has_statement),
                     text::line_value(reply, "Opposite:", &has_opposite), question};
  if (!has_statement || !has_opposite) {
    throw JudgeParseError("statement conversion reply lacks a Statement:/Opposite: line");
  }
  if (pair.statement.empty() || pair.negation.empty() || pair.statement == pair.negation) {
    throw JudgeParseError("statement conversion produced an empty or self-identical pair");
  }
  return pair;
}

Permutation shuffle_options(std::uint64_t seed, const std::string& sample_id, int trial) {
  Permutation p{0, 1, 2};
  SeededStream rng(seed, "probe-shuffle", sample_id, static_cast<std::uint64_t>(trial));
  rng.shuffle(std::span<int>(p));
  return p;
}

std::optional<char> parse_option_letter(std::string_view reply, std::size_t n_options) {
  const std::string_view tail = text::after_last(reply, templates::kAnswerCue);
  const auto valid = [&](char c) {
    return c >= 'A' && static_cast<std::size_t>(c - 'A') < n_options;
  };
  for (std::size_t i = 0; i + 2 < tail.size(); ++i) {
    if (tail[i] == '(' && tail[i + 2] == ')') {
      const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(tail[i + 1])));
      if (valid(c)) return c;
    }
  }
  const std::string_view t = text::trim(tail);
  if (!t.empty()) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(t.front())));
    const bool alone = t.size() == 1 || std::isalnum(static_cast<unsigned char>(t[1])) == 0;
    if (alone && valid(c)) return c;
  }
  return std::nullopt;
}

ProbeResult probe_yesno(const Sample& sample, const StatementPair& pair, Gateway& target,
                        std::uint64_t seed) {
  if (sample.kind != SampleKind::yesno) throw std::invalid_argument("probe_yesno needs yes-no");
  const std::array<std::string, 3> texts{pair.statement, pair.negation,
                                         std::string(templates::kIdkOption)};

  ProbeResult result;
  result.sample_id = sample.id;
  result.kind = SampleKind::yesno;
  result.pair = pair;

  for (int t = 0; t < 3; ++t) {
    ProbeTrial trial;
    trial.permutation = shuffle_options(seed, sample.id, t);
    std::array<std::string, 3> shown;
    for (std::size_t pos = 0; pos < 3; ++pos) {
      shown[pos] = texts[static_cast<std::size_t>(trial.permutation[pos])];
    }

    const std::string tag = "probe-" + sample.id + "-t" + std::to_string(t);
    std::vector<ChatMessage> messages{{Role::user, templates::probe_yesno_first(shown)}};
    const std::string reasoning = target.ask(tag + "-cot", messages);
    messages.push_back({Role::assistant, reasoning});
    messages.push_back({Role::user, templates::probe_yesno_second()});
    const std::string reply = target.ask(tag, messages);

    trial.letter = parse_option_letter(reply, 3);
    if (trial.letter) {
      const auto pos = static_cast<std::size_t>(*trial.letter - 'A');
      trial.choice = static_cast<ProbeChoice>(trial.permutation[pos]);
    } else {
      spdlog::warn("{}: trial {} reply has no option letter", sample.id, t);
    }
    result.trials.push_back(trial);
  }

  const auto& first = result.trials.front().choice;
  result.consistent = first.has_value() &&
                      std::all_of(result.trials.begin(), result.trials.end(),
                                  [&](const ProbeTrial& tr) { return tr.choice == first; });
  return result;
}

ProbeResult probe_short(const Sample& sample, Gateway& target) {
  if (sample.kind != SampleKind::short_answer) {
    throw std::invalid_argument("probe_short needs a short-answer sample");
  }
  const std::string tag = "probe-" + sample.id;
  std::vector<ChatMessage> messages{{Role::user, templates::probe_short_first(sample.question)}};
  const std::string reasoning = target.ask(tag + "-cot", messages);
  messages.push_back({Role::assistant, reasoning});
  messages.push_back({Role::user, templates::probe_short_second()});
  const std::string reply = target.ask(tag, messages);

  if (reply.find(templates::kAnswerCue) == std::string::npos) {
    spdlog::warn("{}: no 'Answer:' marker, using the whole reply as the prediction", sample.id);
  }
  std::string_view prediction = text::trim(text::after_last(reply, templates::kAnswerCue));
  while (!prediction.empty() && prediction.back() == '.') prediction.remove_suffix(1);

  ProbeResult result;
  result.sample_id = sample.id;
  result.kind = SampleKind::short_answer;
  result.prediction = std::string(text::trim(prediction));
  result.consistent = true;
  return result;
}

bool verify_short_answer(const std::string& question, const std::string& prediction,
                         const std::string& gold, Gateway& judge, const std::string& tag) {
  if (text::normalize_answer(prediction) == text::normalize_answer(gold)) return true;
  const std::string reply =
      judge.ask(tag, {{Role::user, templates::verify_answer(question, prediction, gold)}});
  const auto word = text::leading_word(text::after_last(reply, templates::kAnswerCue));
  if (word == "yes") return true;
  if (word == "no") return false;
  throw JudgeParseError("judge verdict is neither Yes nor No: '" + reply + "'");
}

KnowledgeState categorize(const ProbeResult& result, const std::string& gold) {
  if (result.kind == SampleKind::yesno) {
    const auto choice = result.agreed_choice();
    if (!choice) throw InconsistentProbe("probe for " + result.sample_id + " is not consistent");
    if (*choice == ProbeChoice::idk) return KnowledgeState::absent;
    const ProbeChoice correct =
        text::lower(gold) == "yes" ? ProbeChoice::statement : ProbeChoice::negation;
    return *choice == correct ? KnowledgeState::parametric : KnowledgeState::counter_parametric;
  }

  if (!result.prediction) {
    throw std::invalid_argument("short-answer probe for " + result.sample_id +
                                " has no prediction");
  }
  if (result.is_idk()) return KnowledgeState::absent;
  if (!result.judge_verdict) {
    throw std::invalid_argument("short-answer probe for " + result.sample_id +
                                " has not been verified");
  }
  return *result.judge_verdict ? KnowledgeState::parametric : KnowledgeState::counter_parametric;
}

jsonl::Json to_json(const ProbeResult& r) {
  jsonl::Json j;
  j["id"] = r.sample_id;
  j["kind"] = std::string(to_string(r.kind));
  j["state"] = r.state ? jsonl::Json(std::string(to_string(*r.state))) : jsonl::Json(nullptr);
  j["consistent"] = r.consistent;
  j["prediction"] = r.prediction ? jsonl::Json(*r.prediction) : jsonl::Json(nullptr);
  auto trials = jsonl::Json::array();
  for (const auto& t : r.trials) {
    jsonl::Json tj;
    tj["permutation"] = t.permutation;
    tj["letter"] = t.letter ? jsonl::Json(std::string(1, *t.letter)) : jsonl::Json(nullptr);
    tj["choice"] = t.choice ? jsonl::Json(std::string(to_string(*t.choice))) : jsonl::Json(nullptr);
    trials.push_back(std::move(tj));
  }
  j["trials"] = std::move(trials);
  if (r.pair) {
    j["statement"] = r.pair->statement;
    j["negation"] = r.pair->negation;
  }
  if (r.judge_verdict) j["judge_verdict"] = *r.judge_verdict;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

ProbeResult probe_from_json(const jsonl::Json& j, std::size_t line_no) try {
  ProbeResult r;
  r.sample_id = jsonl::get_string(j, "id", line_no);
  const auto kind = parse_kind(jsonl::get_string(j, "kind", line_no));
  if (!kind) throw MalformedLine(line_no, "bad kind");
  r.kind = *kind;
  if (const auto& s = j.at("state"); !s.is_null()) {
    r.state = parse_state(s.get<std::string>());
    if (!r.state) throw MalformedLine(line_no, "bad state");
  }
  r.consistent = jsonl::get_bool(j, "consistent", line_no);
  if (const auto& p = j.at("prediction"); !p.is_null()) r.prediction = p.get<std::string>();
  for (const auto& tj : j.at("trials")) {
    ProbeTrial t;
    t.permutation = tj.at("permutation").get<Permutation>();
    if (const auto& l = tj.at("letter"); !l.is_null()) {
      const auto s = l.get<std::string>();
      if (s.size() != 1) throw MalformedLine(line_no, "bad trial letter");
      t.letter = s.front();
    }
    if (const auto& c = tj.at("choice"); !c.is_null()) {
      t.choice = parse_choice(c.get<std::string>());
      if (!t.choice) throw MalformedLine(line_no, "bad trial choice");
    }
    r.trials.push_back(t);
  }
  if (j.contains("statement") && j.contains("negation")) {
    r.pair = StatementPair{j.at("statement").get<std::string>(),
                           j.at("negation").get<std::string>(), ""};
  }
  if (j.contains("judge_verdict")) r.judge_verdict = j.at("judge_verdict").get<bool>();
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  return r;
} catch (const nlohmann::json::exception& e) {
  throw MalformedLine(line_no, e.what());
}

}  // namespace negbias
