#include "negbias/metrics.hpp"

#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "negbias/errors.hpp"

namespace negbias {
namespace {

struct Counts {
  std::size_t pos = 0, pos_correct = 0;
  std::size_t neg = 0, neg_correct = 0;
  std::size_t excluded = 0;
};

Counts count(std::span<const ScoredResponse> cell) {
  Counts c;
  for (const auto& r : cell) {
    if (!is_scorable(r.verdict)) {
      ++c.excluded;
      continue;
    }
    const bool ok = correctness(r.verdict, r.gold).value();
    if (r.gold == Polarity::positive) {
      ++c.pos;
      c.pos_correct += ok ? 1 : 0;
    } else {
      ++c.neg;
      c.neg_correct += ok ? 1 : 0;
    }
  }
  return c;
}

double ratio(std::size_t num, std::size_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

double class_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t den = 2 * tp + fp + fn;
  return den == 0 ? 0.0 : ratio(2 * tp, den);
}

std::string opt6(std::optional<double> v) {
  if (!v) return "";
  std::string s = fmt::format("{:.6f}", *v);
  return s == "-0.000000" ? "0.000000" : s;
}

using CellKey = std::tuple<std::string, KnowledgeState, QaFormat, int>;
using NbsKey = std::tuple<std::string, KnowledgeState, int>;

const EvalItem& lookup(const std::unordered_map<std::string, const EvalItem*>& by_id,
                       const std::string& id) {
  const auto it = by_id.find(id);
  if (it == by_id.end()) throw OrphanRecord(id);
  return *it->second;
}

std::unordered_map<std::string, const EvalItem*> index_items(const std::vector<EvalItem>& items) {
  std::unordered_map<std::string, const EvalItem*> by_id;
  for (const auto& it : items) by_id.emplace(it.id, &it);
  return by_id;
}

}  // namespace

SubsetScores delta(std::span<const ScoredResponse> cell) {
  const Counts c = count(cell);
  if (c.pos == 0) throw EmptyPolarity("positive");
  if (c.neg == 0) throw EmptyPolarity("negative");
  SubsetScores s;
  s.acc_pos = ratio(c.pos_correct, c.pos);
  s.acc_neg = ratio(c.neg_correct, c.neg);
  s.delta = s.acc_neg - s.acc_pos;
  s.weighted_f1 = weighted_f1(cell);
  s.n_pos = c.pos;
  s.n_neg = c.neg;
  s.n_excluded = c.excluded;
  return s;
}

double weighted_f1(std::span<const ScoredResponse> cell) {
  // rows: gold yes/no, columns: predicted yes/no
  std::size_t m[2][2] = {{0, 0}, {0, 0}};
  for (const auto& r : cell) {
    if (!is_scorable(r.verdict)) continue;
    const int g = r.gold == Polarity::positive ? 0 : 1;
    const int p = r.verdict == Verdict::positive ? 0 : 1;
    ++m[g][p];
  }
  const std::size_t n = m[0][0] + m[0][1] + m[1][0] + m[1][1];
  if (n == 0) throw NoScorableRecords();
  const double f1_yes = class_f1(m[0][0], m[1][0], m[0][1]);
  const double f1_no = class_f1(m[1][1], m[0][1], m[1][0]);
  return (static_cast<double>(m[0][0] + m[0][1]) * f1_yes +
          static_cast<double>(m[1][0] + m[1][1]) * f1_no) /
         static_cast<double>(n);
}

CellScore score_cell(std::span<const ScoredResponse> cell) {
  const Counts c = count(cell);
  CellScore s;
  s.n_pos = c.pos;
  s.n_neg = c.neg;
  s.n_excluded = c.excluded;
  if (c.pos > 0) s.acc_pos = ratio(c.pos_correct, c.pos);
  if (c.neg > 0) s.acc_neg = ratio(c.neg_correct, c.neg);
  if (s.acc_pos && s.acc_neg) s.delta = *s.acc_neg - *s.acc_pos;
  if (c.pos + c.neg > 0) s.weighted_f1 = weighted_f1(cell);
  return s;
}

RunReport score_run(const std::vector<RunRecord>& records, const std::vector<EvalItem>& items) {
  const auto by_id = index_items(items);

  std::map<CellKey, std::vector<ScoredResponse>> cells;
  for (const auto& r : records) {
    const auto& item = lookup(by_id, r.item_id);
    cells[{item.dataset, item.subset, r.format, r.scenario.index()}].push_back(
        {item.polarity, r.verdict});
  }

  RunReport report;
  std::map<NbsKey, NbsRow> nbs_rows;
  for (const auto& [key, responses] : cells) {
    const auto& [dataset, subset, format, scenario] = key;
    CellRow row{dataset, subset, format, ScenarioFlags::from_index(scenario),
                score_cell(responses)};
    if (format != QaFormat::ynmcqa) {
      auto& n = nbs_rows[{dataset, subset, scenario}];
      n.dataset = dataset;
      n.subset = subset;
      n.scenario = row.scenario;
      (format == QaFormat::ynqa ? n.delta_ynqa : n.delta_mcqa) = row.score.delta;
    }
    report.cells.push_back(std::move(row));
  }

  struct Acc {
    double ynqa = 0, mcqa = 0, nbs = 0;
    std::size_t n = 0;
  };
  std::map<std::pair<KnowledgeState, int>, Acc> means;
  for (auto& [key, row] : nbs_rows) {
    if (row.delta_ynqa && row.delta_mcqa) {
      row.nbs = nbs(*row.delta_ynqa, *row.delta_mcqa);
      auto& a = means[{row.subset, row.scenario.index()}];
      a.ynqa += *row.delta_ynqa;
      a.mcqa += *row.delta_mcqa;
      a.nbs += *row.nbs;
      ++a.n;
    }
    report.nbs.push_back(row);
  }
  for (const auto& [key, a] : means) {
    const auto n = static_cast<double>(a.n);
    report.means.push_back({"mean", key.first, ScenarioFlags::from_index(key.second), a.ynqa / n,
                            a.mcqa / n, a.nbs / n, a.n});
  }
  return report;
}

std::optional<double> ShiftRow::yes_rate() const {
  return n_yes == 0 ? std::nullopt : std::optional(ratio(yes_to_idk, n_yes));
}
std::optional<double> ShiftRow::no_rate() const {
  return n_no == 0 ? std::nullopt : std::optional(ratio(no_to_idk, n_no));
}
std::optional<double> ShiftRow::correct_rate() const {
  return n_correct == 0 ? std::nullopt : std::optional(ratio(correct_to_idk, n_correct));
}

ShiftTable prediction_shift(const std::vector<RunRecord>& base,
                            const std::vector<RunRecord>& with_idk,
                            const std::vector<EvalItem>& items) {
  using JoinKey = std::tuple<std::string, QaFormat, bool, bool>;
  const auto join_key = [](const RunRecord& r) {
    return JoinKey{r.item_id, r.format, r.scenario.with_context, r.scenario.with_cot};
  };

  std::map<JoinKey, const RunRecord*> idk_side;
  for (const auto& r : with_idk) {
    if (!r.scenario.with_idk) {
      throw MismatchedRuns("IDK run contains a record without the IDK option: " + r.item_id);
    }
    if (!idk_side.emplace(join_key(r), &r).second) {
      throw MismatchedRuns("IDK run has duplicate records for " + r.item_id);
    }
  }
  if (base.size() != with_idk.size()) {
    throw MismatchedRuns(fmt::format("base run has {} records, IDK run has {}", base.size(),
                                     with_idk.size()));
  }

  const auto by_id = index_items(items);
  std::set<JoinKey> seen;
  std::map<CellKey, ShiftRow> rows;
  for (const auto& b : base) {
    if (b.scenario.with_idk) {
      throw MismatchedRuns("base run contains a record with the IDK option: " + b.item_id);
    }
    const auto key = join_key(b);
    if (!seen.insert(key).second) throw MismatchedRuns("base run has duplicate records for " + b.item_id);
    const auto it = idk_side.find(key);
    if (it == idk_side.end()) {
      throw MismatchedRuns("no IDK-run record pairs with " + b.item_id + " " +
                           std::string(to_string(b.format)) + " " + scenario_id(b.scenario));
    }
    const auto& item = lookup(by_id, b.item_id);
    const bool to_idk = it->second->verdict == Verdict::idk;

    for (const std::string& dataset : {item.dataset, std::string("ALL")}) {
      auto& row = rows[{dataset, item.subset, b.format, b.scenario.index()}];
      row.dataset = dataset;
      row.subset = item.subset;
      row.format = b.format;
      row.base = b.scenario;
      if (b.verdict == Verdict::positive) {
        ++row.n_yes;
        row.yes_to_idk += to_idk ? 1 : 0;
      } else if (b.verdict == Verdict::negative) {
        ++row.n_no;
        row.no_to_idk += to_idk ? 1 : 0;
      }
      if (b.correct == true) {
        ++row.n_correct;
        row.correct_to_idk += to_idk ? 1 : 0;
      }
    }
  }

  ShiftTable table;
  // Per-dataset rows first, pooled rows last.
  for (const bool pooled : {false, true}) {
    for (const auto& [key, row] : rows) {
      if ((row.dataset == "ALL") == pooled) table.rows.push_back(row);
    }
  }
  return table;
}

std::string fmt3(std::optional<double> v) {
  if (!v) return "—";
  std::string s = fmt::format("{:.3f}", *v);
  return s == "-0.000" ? "0.000" : s;
}

std::string scores_csv(const RunReport& report) {
  std::string out =
      "dataset,subset,format,scenario,acc_pos,acc_neg,delta,weighted_f1,n_pos,n_neg,n_excluded\n";
  for (const auto& c : report.cells) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", c.dataset, to_string(c.subset),
                       to_string(c.format), scenario_id(c.scenario), opt6(c.score.acc_pos),
                       opt6(c.score.acc_neg), opt6(c.score.delta), opt6(c.score.weighted_f1),
                       c.score.n_pos, c.score.n_neg, c.score.n_excluded);
  }
  return out;
}

std::string nbs_csv(const RunReport& report) {
  std::string out = "dataset,subset,scenario,delta_ynqa,delta_mcqa,nbs\n";
  for (const auto* rows : {&report.nbs, &report.means}) {
    for (const auto& r : *rows) {
      out += fmt::format("{},{},{},{},{},{}\n", r.dataset, to_string(r.subset),
                         scenario_id(r.scenario), opt6(r.delta_ynqa), opt6(r.delta_mcqa),
                         opt6(r.nbs));
    }
  }
  return out;
}

std::string shift_csv(const ShiftTable& table) {
  std::string out =
      "dataset,subset,format,base_scenario,n_yes,yes_to_idk,n_no,no_to_idk,n_correct,"
      "correct_to_idk\n";
  for (const auto& r : table.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.dataset, to_string(r.subset),
                       to_string(r.format), scenario_id(r.base), r.n_yes, opt6(r.yes_rate()),
                       r.n_no, opt6(r.no_rate()), r.n_correct, opt6(r.correct_rate()));
  }
  return out;
}

std::string report_markdown(const RunReport& report) {
  if (report.cells.empty()) return "No run records.\n";

  std::map<int, std::vector<const NbsRow*>> by_scenario;
  for (const auto& r : report.nbs) by_scenario[r.scenario.index()].push_back(&r);

  std::map<std::tuple<std::string, KnowledgeState, int, QaFormat>, const CellScore*> cell_of;
  for (const auto& c : report.cells) {
    cell_of[{c.dataset, c.subset, c.scenario.index(), c.format}] = &c.score;
  }
  const auto get = [&](const NbsRow& r, QaFormat f) -> const CellScore* {
    const auto it = cell_of.find({r.dataset, r.subset, r.scenario.index(), f});
    return it == cell_of.end() ? nullptr : it->second;
  };
  const auto d = [](const CellScore* c) { return fmt3(c ? c->delta : std::nullopt); };
  const auto f1 = [](const CellScore* c) { return fmt3(c ? c->weighted_f1 : std::nullopt); };

  std::string out;
  for (const auto& [scenario, rows] : by_scenario) {
    out += fmt::format("## Scenario {}\n\n", scenario_id(ScenarioFlags::from_index(scenario)));
    out +=
        "| Dataset | Subset | Δ MCQA | Δ YNQA | W.F1 MCQA | W.F1 YNQA | NBS | Δ YNMCQA | "
        "W.F1 YNMCQA |\n"
        "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto* r : rows) {
      const auto* m = get(*r, QaFormat::mcqa);
      const auto* y = get(*r, QaFormat::ynqa);
      const auto* ym = get(*r, QaFormat::ynmcqa);
      out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n", r->dataset,
                         to_string(r->subset), d(m), d(y), f1(m), f1(y), fmt3(r->nbs), d(ym),
                         f1(ym));
    }
    out += '\n';
  }

  if (!report.means.empty()) {
    out += "## Mean NBS across datasets\n\n| Scenario | Subset | Datasets | Δ MCQA | Δ YNQA | NBS |\n"
           "|---|---|---|---|---|---|\n";
    for (const auto& r : report.means) {
      out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", scenario_id(r.scenario),
                         to_string(r.subset), r.n_datasets, fmt3(r.delta_mcqa),
                         fmt3(r.delta_ynqa), fmt3(r.nbs));
    }
    out += '\n';
  }
  return out;
}

std::string shift_markdown(const ShiftTable& table) {
  if (table.rows.empty()) return "No paired runs.\n";
  std::string out =
      "| Dataset | Subset | Format | Base scenario | Yes→IDK | No→IDK | Correct→IDK |\n"
      "|---|---|---|---|---|---|---|\n";
  for (const auto& r : table.rows) {
    out += fmt::format("| {} | {} | {} | {} | {} | {} | {} |\n", r.dataset, to_string(r.subset),
                       to_string(r.format), scenario_id(r.base), fmt3(r.yes_rate()),
                       fmt3(r.no_rate()), fmt3(r.correct_rate()));
  }
  return out;
}

}  // namespace negbias
