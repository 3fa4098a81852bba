#include <set>

#include <gtest/gtest.h>

#include "negbias/core.hpp"

using namespace negbias;

namespace {

EvalItem aligned_item(Polarity p) {
  EvalItem item;
  item.id = "q1";
  item.dataset = "toy";
  item.polarity = p;
  item.ynqa_label = p;
  item.mcqa_options = {"It rains.", "It does not rain."};
  item.mcqa_yes_index = 0;
  item.mcqa_correct_index = p == Polarity::positive ? 0 : 1;
  return item;
}

}  // namespace

TEST(ScenarioId, Examples) {
  EXPECT_EQ(scenario_id({false, false, false}), "noctx");
  EXPECT_EQ(scenario_id({true, true, true}), "ctx+idk+cot");
  EXPECT_EQ(scenario_id({false, true, false}), "noctx+idk");
}

TEST(ScenarioId, BijectiveOverAllCombinations) {
  std::set<std::string> ids;
  for (int i = 0; i < 8; ++i) {
    const auto flags = ScenarioFlags::from_index(i);
    EXPECT_EQ(flags.index(), i);
    const auto id = scenario_id(flags);
    ids.insert(id);
    const auto back = parse_scenario_id(id);
    ASSERT_TRUE(back.has_value()) << id;
    EXPECT_EQ(*back, flags);
  }
  EXPECT_EQ(ids.size(), 8U);
}

TEST(ScenarioId, RejectsNonCanonicalIds) {
  for (const char* bad : {"", "ctx+cot+idk", "CTX", "noctx+", "idk", "ctx+idk+cot+cot", "ctx "}) {
    EXPECT_FALSE(parse_scenario_id(bad).has_value()) << bad;
  }
}

TEST(EvalItemInvariant, FlippingPolarityFlipsCorrectIndexRelativeToYes) {
  for (auto p : {Polarity::positive, Polarity::negative}) {
    auto item = aligned_item(p);
    EXPECT_FALSE(check_item(item).has_value());
    item.polarity = flip(p);
    item.ynqa_label = flip(p);
    EXPECT_TRUE(check_item(item).has_value());
    item.mcqa_correct_index = 1 - item.mcqa_correct_index;
    EXPECT_FALSE(check_item(item).has_value());
  }
}

TEST(EvalItemInvariant, Violations) {
  auto item = aligned_item(Polarity::positive);
  item.mcqa_options[1] = item.mcqa_options[0];
  EXPECT_TRUE(check_item(item).has_value());

  item = aligned_item(Polarity::positive);
  item.mcqa_options[0].clear();
  EXPECT_TRUE(check_item(item).has_value());

  item = aligned_item(Polarity::positive);
  item.ynqa_label = Polarity::negative;
  EXPECT_TRUE(check_item(item).has_value());

  item = aligned_item(Polarity::positive);
  item.ynmcqa_yes_index = 2;
  EXPECT_TRUE(check_item(item).has_value());
}

TEST(Correctness, PresentOnlyForScorableVerdicts) {
  EXPECT_EQ(correctness(Verdict::positive, Polarity::positive), true);
  EXPECT_EQ(correctness(Verdict::negative, Polarity::positive), false);
  EXPECT_EQ(correctness(Verdict::negative, Polarity::negative), true);
  EXPECT_EQ(correctness(Verdict::positive, Polarity::negative), false);
  EXPECT_FALSE(correctness(Verdict::idk, Polarity::positive).has_value());
  EXPECT_FALSE(correctness(Verdict::unparseable, Polarity::negative).has_value());
}

TEST(EnumStrings, RoundTrip) {
  for (auto v : {SampleKind::yesno, SampleKind::short_answer}) EXPECT_EQ(parse_kind(to_string(v)), v);
  for (auto v : kAllStates) EXPECT_EQ(parse_state(to_string(v)), v);
  for (auto v : {Polarity::positive, Polarity::negative}) EXPECT_EQ(parse_polarity(to_string(v)), v);
  for (auto v : kAllFormats) EXPECT_EQ(parse_format(to_string(v)), v);
  for (auto v : {Verdict::positive, Verdict::negative, Verdict::idk, Verdict::unparseable}) {
    EXPECT_EQ(parse_verdict(to_string(v)), v);
  }
  EXPECT_EQ(to_string(SampleKind::short_answer), "short");
  EXPECT_FALSE(parse_state("Parametric").has_value());
}
