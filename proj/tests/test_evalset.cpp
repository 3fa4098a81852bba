#include <fstream>
#include <map>
#include <tuple>

#include <gtest/gtest.h>

#include "negbias/errors.hpp"
#include "negbias/evalset.hpp"
#include "negbias/templates.hpp"
#include "support.hpp"

using namespace negbias;
using namespace negbias::testing;

namespace {

const std::string kHotel = "Which country the director of film Hotel By The Hour is from?";
const std::string kYesQ = "Is the director of film Hotel By The Hour from Austria?";
const std::string kNoQ = "Is the director of film Hotel By The Hour from United States?";

Sample hotel() { return {"s1", "toy", SampleKind::short_answer, kHotel, "Austria", "He was Austrian."}; }

Sample yesno(const std::string& id, const std::string& gold) {
  return {id, "toy", SampleKind::yesno, "Is there a warthog on Broadway?", gold, ""};
}

const StatementPair kPair{"There is a warthog on Broadway.", "There is no warthog on Broadway.", ""};

/// First seed whose mcqa order for `id` puts the statement (or gold) at `index`.
std::uint64_t seed_with_order(const std::string& id, int index) {
  for (std::uint64_t seed = 0;; ++seed) {
    if (build_item_yesno(yesno(id, "yes"), kPair, KnowledgeState::absent, seed).mcqa_yes_index == index) {
      return seed;
    }
  }
}

EvalItem cell_item(const std::string& id, const std::string& dataset, KnowledgeState s, Polarity p) {
  auto it = build_item_yesno(yesno(id, p == Polarity::positive ? "yes" : "no"), kPair, s, 17);
  it.dataset = dataset;
  return it;
}

std::vector<EvalItem> cell(const std::string& dataset, KnowledgeState s, int pos, int neg) {
  std::vector<EvalItem> out;
  for (int i = 0; i < pos; ++i) out.push_back(cell_item(dataset + "p" + std::to_string(i), dataset, s, Polarity::positive));
  for (int i = 0; i < neg; ++i) out.push_back(cell_item(dataset + "n" + std::to_string(i), dataset, s, Polarity::negative));
  return out;
}

}  // namespace

TEST(GenWrongAnswer, AcceptsDistinctLabel) {
  auto judge = scripted({reply("wrong-s1-a1", "Contaminated answer: United States")});
  const auto w = gen_wrong_answer(hotel(), "Austria", *judge);
  EXPECT_EQ(w.text, "United States");
  EXPECT_EQ(w.attempts, 1);
}

TEST(GenWrongAnswer, RetriesWhenJudgeReturnsGold) {
  auto judge = scripted({reply("wrong-s1-a1", "austria."), reply("wrong-s1-a2", "United States.\nextra")});
  const auto w = gen_wrong_answer(hotel(), "Austria", *judge);
  EXPECT_EQ(w.text, "United States");
  EXPECT_EQ(w.attempts, 2);
}

TEST(GenWrongAnswer, RetryAttemptsUseRetryTemperature) {
  auto provider = std::make_shared<RecordingProvider>("Austria");
  Gateway judge(provider, quick_options());
  EXPECT_THROW(gen_wrong_answer(hotel(), "Germany", judge, 3, 0.9), ExhaustedAttempts);
  const auto reqs = provider->requests();
  ASSERT_EQ(reqs.size(), 3U);
  EXPECT_EQ(reqs[0].temperature, 0.0);
  EXPECT_EQ(reqs[1].temperature, 0.9);
  EXPECT_EQ(reqs[2].tag, "wrong-s1-a3");
}

TEST(GenWrongAnswer, ModelPredictionEveryTimeExhausts) {
  auto judge = scripted({reply("wrong-s1-*", "Contaminated answer: Germany")});
  try {
    gen_wrong_answer(hotel(), "Germany", *judge);
    FAIL();
  } catch (const ExhaustedAttempts& e) {
    EXPECT_EQ(e.attempts(), 5);
  }
  EXPECT_THROW(gen_wrong_answer(yesno("q", "yes"), "", *judge), std::invalid_argument);
}

TEST(GenYesNoQuestions, HotelExample) {
  auto judge = scripted({reply("ynq-s1", "Yes-Question: " + kYesQ + "\nNo-Question: " + kNoQ)});
  const auto [y, n] = gen_yesno_questions(kHotel, "Austria", "United States", *judge, "ynq-s1");
  EXPECT_EQ(y, kYesQ);
  EXPECT_EQ(n, kNoQ);
}

TEST(GenYesNoQuestions, LifeHitsExample) {
  const std::string yq = "Is the director of Life Hits born later than the director of It'S In The Air?";
  const std::string nq = "Is the director of It'S In The Air born later than the director of Life Hits?";
  auto judge = scripted({reply("ynq-x", "[Output]\nYes-Question: " + yq + "\nNo-Question: " + nq)});
  const auto [y, n] = gen_yesno_questions("Which film has the director born later, Life Hits or It'S In The Air?",
                                          "Life Hits", "It'S In The Air", *judge, "ynq-x");
  EXPECT_EQ(y, yq);
  EXPECT_EQ(n, nq);
}

TEST(GenYesNoQuestions, MissingNoQuestionIsJudgeParseError) {
  auto judge = scripted({reply("ynq-s1", "Yes-Question: " + kYesQ)});
  EXPECT_THROW(gen_yesno_questions(kHotel, "Austria", "United States", *judge, "ynq-s1"), JudgeParseError);
  EXPECT_THROW(gen_yesno_questions(kHotel, "Austria", "austria", *judge, "ynq-s1"), std::invalid_argument);
}

TEST(GenerateNegatives, ChainsBothJudgeCalls) {
  auto judge = scripted({reply("wrong-s1-a1", "United States"),
                         reply("ynq-s1", "Yes-Question: " + kYesQ + "\nNo-Question: " + kNoQ)});
  const auto negs = generate_negatives(hotel(), "Unanswerable", *judge);
  EXPECT_EQ(negs.wrong_answer, "United States");
  EXPECT_EQ(negs.yes_question, kYesQ);
  EXPECT_EQ(negs.no_question, kNoQ);
  EXPECT_EQ(negs.attempts, 1);
}

TEST(BuildItemYesNo, StatementFirstOrder) {
  const auto seed = seed_with_order("q1", 0);
  const auto pos = build_item_yesno(yesno("q1", "yes"), kPair, KnowledgeState::parametric, seed);
  EXPECT_EQ(pos.mcqa_options[0], kPair.statement);
  EXPECT_EQ(pos.mcqa_correct_index, 0);
  EXPECT_EQ(pos.mcqa_yes_index, 0);
  EXPECT_EQ(pos.polarity, Polarity::positive);
  EXPECT_EQ(pos.ynqa_question, "Is there a warthog on Broadway?");

  const auto neg = build_item_yesno(yesno("q1", "no"), kPair, KnowledgeState::parametric, seed);
  EXPECT_EQ(neg.mcqa_correct_index, 1);
  EXPECT_EQ(neg.mcqa_yes_index, 0);
  EXPECT_EQ(neg.polarity, Polarity::negative);
  EXPECT_EQ(neg.ynqa_label, Polarity::negative);
  EXPECT_FALSE(check_item(pos).has_value());
  EXPECT_FALSE(check_item(neg).has_value());
}

TEST(BuildItemYesNo, NegationFirstOrderAndDeterminism) {
  const auto seed = seed_with_order("q1", 1);
  const auto a = build_item_yesno(yesno("q1", "no"), kPair, KnowledgeState::absent, seed);
  EXPECT_EQ(a.mcqa_options[0], kPair.negation);
  EXPECT_EQ(a.mcqa_correct_index, 0);
  EXPECT_EQ(a, build_item_yesno(yesno("q1", "no"), kPair, KnowledgeState::absent, seed));
}

TEST(BuildItemShort, PositiveAndNegative) {
  const GeneratedNegatives negs{"United States", kYesQ, kNoQ, 1};
  const auto pos = build_item_short(hotel(), negs, KnowledgeState::absent, Polarity::positive, 17);
  EXPECT_EQ(pos.ynqa_question, kYesQ);
  EXPECT_EQ(pos.ynqa_label, Polarity::positive);
  EXPECT_EQ(pos.mcqa_question, kHotel);
  EXPECT_EQ(pos.mcqa_options[static_cast<std::size_t>(pos.mcqa_correct_index)], "Austria");
  EXPECT_EQ(pos.mcqa_correct_index, pos.mcqa_yes_index);

  const auto neg = build_item_short(hotel(), negs, KnowledgeState::absent, Polarity::negative, 17);
  EXPECT_EQ(neg.ynqa_question, kNoQ);
  EXPECT_EQ(neg.ynqa_label, Polarity::negative);
  EXPECT_EQ(neg.mcqa_options[static_cast<std::size_t>(neg.mcqa_yes_index)], "United States");
  EXPECT_NE(neg.mcqa_correct_index, neg.mcqa_yes_index);
  EXPECT_FALSE(check_item(pos).has_value());
  EXPECT_FALSE(check_item(neg).has_value());
  EXPECT_EQ(pos, build_item_short(hotel(), negs, KnowledgeState::absent, Polarity::positive, 17));
}

TEST(OptionOrder, EachOrderNearHalfOverTenThousandDraws) {
  const GeneratedNegatives negs{"United States", kYesQ, kNoQ, 1};
  int yesno_first = 0, short_first = 0, ynmcqa_first = 0;
  constexpr int kN = 10'000;
  for (int i = 0; i < kN; ++i) {
    const std::string id = "q" + std::to_string(i);
    yesno_first += build_item_yesno(yesno(id, "yes"), kPair, KnowledgeState::absent, 17).mcqa_yes_index == 0;
    auto s = hotel();
    s.id = id;
    short_first += build_item_short(s, negs, KnowledgeState::absent, Polarity::positive, 17).mcqa_correct_index == 0;
    ynmcqa_first += build_item_yesno(yesno(id, "no"), kPair, KnowledgeState::absent, 17).ynmcqa_yes_index == 0;
  }
  for (int n : {yesno_first, short_first, ynmcqa_first}) {
    EXPECT_NEAR(static_cast<double>(n) / kN, 0.5, 0.05);
  }
}

TEST(BalancePolarity, AlreadyBalancedUnchanged) {
  const auto items = cell("d", KnowledgeState::absent, 40, 40);
  EXPECT_EQ(balance_polarity(items, 17), items);
}

TEST(BalancePolarity, DownsamplesLargerSidePerCell) {
  auto items = cell("d", KnowledgeState::absent, 60, 40);
  const auto other = cell("e", KnowledgeState::absent, 3, 7);
  items.insert(items.end(), other.begin(), other.end());
  const auto third = cell("d", KnowledgeState::parametric, 5, 5);
  items.insert(items.end(), third.begin(), third.end());

  const auto out = balance_polarity(items, 17);
  std::map<std::tuple<std::string, KnowledgeState, Polarity>, int> counts;
  for (const auto& it : out) ++counts[{it.dataset, it.subset, it.polarity}];
  EXPECT_EQ((counts[{"d", KnowledgeState::absent, Polarity::positive}]), 40);
  EXPECT_EQ((counts[{"d", KnowledgeState::absent, Polarity::negative}]), 40);
  EXPECT_EQ((counts[{"e", KnowledgeState::absent, Polarity::positive}]), 3);
  EXPECT_EQ((counts[{"e", KnowledgeState::absent, Polarity::negative}]), 3);
  EXPECT_EQ((counts[{"d", KnowledgeState::parametric, Polarity::positive}]), 5);

  // input order is preserved
  std::size_t j = 0;
  for (const auto& it : items) {
    if (j < out.size() && out[j].id == it.id && out[j].dataset == it.dataset) ++j;
  }
  EXPECT_EQ(j, out.size());
  EXPECT_EQ(out, balance_polarity(items, 17));
  EXPECT_NE(out, balance_polarity(items, 18));
}

TEST(BalancePolarity, EmptySideDropsTheCell) {
  EXPECT_TRUE(balance_polarity(cell("d", KnowledgeState::absent, 12, 0), 17).empty());
}

TEST(RenderYnmcqa, YesIndexPlacement) {
  auto item = cell_item("q", "d", KnowledgeState::absent, Polarity::negative);
  item.ynmcqa_yes_index = 0;
  auto r = render_ynmcqa(item);
  EXPECT_EQ(templates::option_inline(r.options), "(A) Yes (B) No");
  EXPECT_EQ(r.question, item.ynqa_question);
  // negative label: the correct letter is the "No" option
  EXPECT_EQ(r.options[1], "No");
  item.ynmcqa_yes_index = 1;
  EXPECT_EQ(templates::option_inline(render_ynmcqa(item).options), "(A) No (B) Yes");
}

TEST(EvalsetJson, RoundTripAndErrors) {
  TempDir dir("es");
  const GeneratedNegatives negs{"United States", kYesQ, kNoQ, 1};
  std::vector<EvalItem> items{build_item_short(hotel(), negs, KnowledgeState::counter_parametric, Polarity::negative, 17),
                              cell_item("q1", "d", KnowledgeState::absent, Polarity::positive)};
  write_evalset(dir / "e.jsonl", items);
  EXPECT_EQ(load_evalset(dir / "e.jsonl"), items);

  const auto j = to_json(items[0]);
  EXPECT_EQ(j.at("ynqa").at("label"), "no");
  EXPECT_EQ(j.at("mcqa").at("options").size(), 2U);

  auto bad = j;
  bad["mcqa"]["correct_index"] = bad["mcqa"]["yes_index"];
  EXPECT_THROW(item_from_json(bad, 3), InputError);
  std::ofstream(dir / "dup.jsonl") << j.dump() << '\n' << j.dump() << '\n';
  EXPECT_THROW(load_evalset(dir / "dup.jsonl"), DuplicateId);
  std::ofstream(dir / "trunc.jsonl") << R"({"id":"x","dataset":"d"})" << '\n';
  EXPECT_THROW(load_evalset(dir / "trunc.jsonl"), MalformedLine);
}
