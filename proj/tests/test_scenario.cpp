#include <gtest/gtest.h>

#include "negbias/errors.hpp"
#include "negbias/evalset.hpp"
#include "negbias/scenario.hpp"
#include "negbias/templates.hpp"
#include "support.hpp"

using namespace negbias;
using namespace negbias::testing;

namespace {

const StatementPair kPair{"There is a warthog on Broadway.", "There is no warthog on Broadway.", ""};

EvalItem make_item(const std::string& id, Polarity p, int yes_index, int ynmcqa_yes_index) {
  Sample s{id, "toy", SampleKind::yesno, "Is there a warthog on Broadway?",
           p == Polarity::positive ? "yes" : "no", "A warthog was seen on Broadway."};
  auto item = build_item_yesno(s, kPair, KnowledgeState::absent, 17);
  if (item.mcqa_yes_index != yes_index) {
    std::swap(item.mcqa_options[0], item.mcqa_options[1]);
    item.mcqa_yes_index = yes_index;
    item.mcqa_correct_index = 1 - item.mcqa_correct_index;
  }
  item.ynmcqa_yes_index = ynmcqa_yes_index;
  EXPECT_FALSE(check_item(item).has_value());
  return item;
}

void erase_all(std::string& s, std::string_view what) {
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what)) s.erase(pos, what.size());
}

/// The prompt with every flag-governed clause removed.
std::string skeleton(const PromptBundle& b, const EvalItem& item) {
  std::string s = b.messages.at(0).content;
  erase_all(s, " and the given context");
  erase_all(s, "Context: " + item.context + "\n");
  erase_all(s, " If you don't know the answer, please respond with 'Answer: Unanswerable'.");
  erase_all(s, " If you don't know which option is correct, choose the option corresponding to \"Unanswerable\".");
  erase_all(s, "\n(C) Unanswerable");
  erase_all(s, " (C) Unanswerable");
  erase_all(s, "\"(A)\", \"(B)\", or \"(C)\"");
  erase_all(s, "\"(A)\" or \"(B)\"");
  erase_all(s, std::string(templates::kCotCue));
  erase_all(s, std::string(templates::kAnswerCue));
  return s;
}

std::string scripted_pick(const EvalItem& item, QaFormat f, Verdict intended) {
  if (intended == Verdict::idk) return "Unanswerable";
  const bool yes = intended == Verdict::positive;
  if (f == QaFormat::mcqa) {
    return item.mcqa_options[static_cast<std::size_t>(yes ? item.mcqa_yes_index : 1 - item.mcqa_yes_index)];
  }
  return yes ? "Yes" : "No";
}

}  // namespace

TEST(RenderPrompt, YnqaPlainEndsWithAnswerCue) {
  const auto item = make_item("q1", Polarity::positive, 0, 0);
  const auto b = render_prompt(item, QaFormat::ynqa, {});
  ASSERT_EQ(b.messages.size(), 1U);
  EXPECT_TRUE(b.messages[0].content.ends_with("Answer:"));
  EXPECT_TRUE(b.closing.empty());
  EXPECT_TRUE(b.letter_map.empty());
  EXPECT_NE(b.messages[0].content.find("you MUST answer with Yes or No"), std::string::npos);
}

TEST(RenderPrompt, YnqaIdkCotClosingTurn) {
  const auto b = render_prompt(make_item("q1", Polarity::positive, 0, 0), QaFormat::ynqa, {false, true, true});
  EXPECT_EQ(b.closing, "Return only the answer with Yes, No, or Unanswerable after 'Answer:'.");
  EXPECT_TRUE(b.messages[0].content.ends_with("Let's think step by step."));
}

TEST(RenderPrompt, YnmcqaOptionsLine) {
  const auto b = render_prompt(make_item("q1", Polarity::negative, 0, 0), QaFormat::ynmcqa, {});
  EXPECT_NE(b.messages[0].content.find("(A) Yes (B) No"), std::string::npos);
  EXPECT_EQ(b.letter_map, (std::vector<Verdict>{Verdict::positive, Verdict::negative}));
}

TEST(RenderPrompt, IdkAppendsUnanswerableOption) {
  const auto b = render_prompt(make_item("q1", Polarity::negative, 1, 0), QaFormat::mcqa, {false, true, false});
  EXPECT_NE(b.messages[0].content.find("(C) Unanswerable"), std::string::npos);
  EXPECT_EQ(b.letter_map, (std::vector<Verdict>{Verdict::negative, Verdict::positive, Verdict::idk}));
}

TEST(RenderPrompt, ScenariosDifferOnlyInGovernedClauses) {
  const auto item = make_item("q1", Polarity::positive, 1, 1);
  for (auto f : kAllFormats) {
    const auto base = skeleton(render_prompt(item, f, {}), item);
    for (int i = 0; i < 8; ++i) {
      const auto flags = ScenarioFlags::from_index(i);
      const auto b = render_prompt(item, f, flags);
      const auto& text = b.messages[0].content;
      SCOPED_TRACE(std::string(to_string(f)) + " " + scenario_id(flags));
      EXPECT_EQ(skeleton(b, item), base);
      EXPECT_EQ(text.find("Context: ") != std::string::npos, flags.with_context);
      EXPECT_EQ(text.find("Unanswerable") != std::string::npos, flags.with_idk);
      EXPECT_EQ(text.ends_with(templates::kCotCue), flags.with_cot);
      EXPECT_EQ(!b.closing.empty(), flags.with_cot);
      EXPECT_EQ(b.letter_map.empty(), f == QaFormat::ynqa);
      if (f != QaFormat::ynqa) EXPECT_EQ(b.letter_map.size(), flags.with_idk ? 3U : 2U);
    }
  }
}

TEST(ParseAnswer, Examples) {
  const std::vector<Verdict> map{Verdict::positive, Verdict::negative};
  EXPECT_EQ(parse_answer("Let me think. Answer: Yes", QaFormat::ynqa, {}, false), Verdict::positive);
  EXPECT_EQ(parse_answer("Answer: Yes... wait. Answer: no.", QaFormat::ynqa, {}, false), Verdict::negative);
  EXPECT_EQ(parse_answer("Answer: (B)", QaFormat::mcqa, map, false), Verdict::negative);
  EXPECT_EQ(parse_answer("Answer: Unanswerable", QaFormat::ynqa, {}, false), Verdict::unparseable);
  EXPECT_EQ(parse_answer("Answer: Unanswerable", QaFormat::ynqa, {}, true), Verdict::idk);
  EXPECT_EQ(parse_answer("Answer: (C)", QaFormat::mcqa, {Verdict::positive, Verdict::negative, Verdict::idk}, false),
            Verdict::unparseable);
  EXPECT_EQ(parse_answer("Answer: (C)", QaFormat::mcqa, map, true), Verdict::unparseable);
  EXPECT_EQ(parse_answer("Yes", QaFormat::ynqa, {}, false), Verdict::positive);
  EXPECT_EQ(parse_answer("Answer: Yesterday", QaFormat::ynqa, {}, false), Verdict::unparseable);
}

TEST(ParseAnswer, RenderThenEchoRoundTrips) {
  for (auto p : {Polarity::positive, Polarity::negative}) {
    for (int yes = 0; yes < 2; ++yes) {
      for (int yn = 0; yn < 2; ++yn) {
        const auto item = make_item("q1", p, yes, yn);
        for (auto f : kAllFormats) {
          for (int i = 0; i < 8; ++i) {
            const auto flags = ScenarioFlags::from_index(i);
            std::vector<Verdict> intents{Verdict::positive, Verdict::negative};
            if (flags.with_idk) intents.push_back(Verdict::idk);
            for (auto v : intents) {
              const std::string tag = run_tag(item.id, f, flags);
              std::vector<ScriptRule> rules{reply(tag + "-cot", "Let me reason.")};
              if (f == QaFormat::ynqa) {
                rules.push_back(reply(tag, "Answer: " + scripted_pick(item, f, v)));
              } else {
                rules.push_back(choose(tag, scripted_pick(item, f, v)));
              }
              auto gw = scripted(rules);
              const auto rec = run_item(item, f, flags, *gw);
              SCOPED_TRACE(tag + " " + std::string(to_string(v)));
              EXPECT_EQ(rec.verdict, v);
              EXPECT_EQ(rec.correct, correctness(v, p));
            }
          }
        }
      }
    }
  }
}

TEST(RunItem, YnqaYesOnPositive) {
  auto gw = scripted({reply("run-*", "Answer: Yes")});
  const auto rec = run_item(make_item("q1", Polarity::positive, 0, 0), QaFormat::ynqa, {}, *gw);
  EXPECT_EQ(rec.verdict, Verdict::positive);
  EXPECT_EQ(rec.correct, true);
  EXPECT_EQ(rec.model, "test-model");
  EXPECT_TRUE(rec.cot_trace.empty());
}

TEST(RunItem, CotStoresTraceAndSendsSecondTurn) {
  auto provider = std::make_shared<RecordingProvider>("reasoning...");
  auto gw = scripted({reply("run-q1-ynqa-noctx+cot-cot", "reasoning..."), reply("run-q1-ynqa-noctx+cot", "Answer: No")});
  const auto rec = run_item(make_item("q1", Polarity::positive, 0, 0), QaFormat::ynqa, {false, false, true}, *gw);
  EXPECT_EQ(rec.cot_trace, "reasoning...");
  EXPECT_EQ(rec.verdict, Verdict::negative);
  EXPECT_EQ(rec.correct, false);

  Gateway rec_gw(provider, quick_options());
  run_item(make_item("q1", Polarity::positive, 0, 0), QaFormat::mcqa, {true, false, true}, rec_gw);
  const auto reqs = provider->requests();
  ASSERT_EQ(reqs.size(), 2U);
  ASSERT_EQ(reqs[1].messages.size(), 3U);
  EXPECT_EQ(reqs[1].messages[1].content, "reasoning...");
  EXPECT_EQ(reqs[1].messages[2].content, "Return only the answer with \"(A)\" or \"(B)\" after 'Answer:'.");
}

TEST(RunItem, UnanswerableUnderIdkHasNoCorrectness) {
  auto gw = scripted({reply("run-*", "Answer: Unanswerable")});
  const auto rec = run_item(make_item("q1", Polarity::negative, 0, 0), QaFormat::ynqa, {true, true, false}, *gw);
  EXPECT_EQ(rec.verdict, Verdict::idk);
  EXPECT_FALSE(rec.correct.has_value());
}

TEST(RunEvalset, CartesianCountAndOrder) {
  std::vector<EvalItem> items{make_item("a", Polarity::positive, 0, 0), make_item("b", Polarity::negative, 1, 1)};
  const std::vector<QaFormat> formats{QaFormat::mcqa, QaFormat::ynqa};
  const std::vector<ScenarioFlags> scenarios{{}, {true, true, false}};
  auto gw = scripted({reply("run-*-ynqa-*", "Answer: No"), reply("run-*-mcqa-*", "Answer: (A)")}, 4);
  const auto recs = run_evalset(items, formats, scenarios, *gw);
  ASSERT_EQ(recs.size(), 8U);
  std::size_t k = 0;
  for (const auto& it : items) {
    for (auto f : formats) {
      for (auto s : scenarios) {
        EXPECT_EQ(recs[k].item_id, it.id);
        EXPECT_EQ(recs[k].format, f);
        EXPECT_EQ(recs[k].scenario, s);
        ++k;
      }
    }
  }
}

TEST(RunEvalset, WarmCacheGivesIdenticalRecordsWithoutCalls) {
  TempDir dir("runs");
  std::vector<EvalItem> items{make_item("a", Polarity::positive, 0, 0), make_item("b", Polarity::negative, 1, 1)};
  const std::vector<ScenarioFlags> scenarios{{}, {false, false, true}};
  auto opts = quick_options(3);
  opts.cache_dir = dir.path();
  auto provider = std::make_shared<RecordingProvider>("Answer: (B)");
  Gateway cold(provider, opts);
  const auto first = run_evalset(items, {kAllFormats.begin(), kAllFormats.end()}, scenarios, cold);
  EXPECT_GT(cold.provider_calls(), 0U);

  Gateway warm(provider, opts);
  const auto second = run_evalset(items, {kAllFormats.begin(), kAllFormats.end()}, scenarios, warm);
  EXPECT_EQ(warm.provider_calls(), 0U);
  EXPECT_EQ(first, second);
}

TEST(RunEvalset, OneFailingItemIsIsolated) {
  std::vector<EvalItem> items{make_item("a", Polarity::positive, 0, 0), make_item("b", Polarity::negative, 0, 0)};
  auto gw = scripted({reply("run-a-*", "Answer: Yes")}, 2);
  const auto recs = run_evalset(items, {QaFormat::ynqa}, {{}, {true, false, false}, {false, true, false}, {true, true, false}}, *gw);
  ASSERT_EQ(recs.size(), 8U);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(recs[k].verdict, Verdict::positive);
  for (std::size_t k = 4; k < 8; ++k) {
    EXPECT_EQ(recs[k].verdict, Verdict::unparseable);
    EXPECT_FALSE(recs[k].error.empty());
    EXPECT_FALSE(recs[k].correct.has_value());
  }
}

TEST(RunRecordJson, RoundTripAndValidation) {
  TempDir dir("rec");
  auto gw = scripted({reply("run-*-cot", "think"), reply("run-*", "Answer: Yes")});
  std::vector<RunRecord> recs{
      run_item(make_item("a", Polarity::negative, 0, 0), QaFormat::ynqa, {true, true, true}, *gw),
      run_item(make_item("a", Polarity::negative, 0, 0), QaFormat::mcqa, {}, *gw)};
  recs[1].error = "x";
  write_records(dir / "r.jsonl", recs);
  EXPECT_EQ(load_records(dir / "r.jsonl"), recs);

  const auto j = to_json(recs[0]);
  EXPECT_EQ(j.at("scenario").at("idk"), true);
  EXPECT_EQ(j.at("correct"), false);
  auto bad = j;
  bad["correct"] = nullptr;
  EXPECT_THROW(record_from_json(bad, 4), MalformedLine);
  bad = j;
  bad["verdict"] = "idk";
  EXPECT_THROW(record_from_json(bad, 4), MalformedLine);
}
