#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "negbias/core.hpp"

namespace negbias {

struct ScoredResponse {
  Polarity gold = Polarity::positive;
  Verdict verdict = Verdict::unparseable;
};

struct SubsetScores {
  double acc_pos = 0;
  double acc_neg = 0;
  double delta = 0;  // acc_neg - acc_pos
  double weighted_f1 = 0;
  std::size_t n_pos = 0;  // scorable positives
  std::size_t n_neg = 0;  // scorable negatives
  std::size_t n_excluded = 0;
};

/// Accuracy gap over the scorable responses of one cell. idk and unparseable
/// verdicts only raise n_excluded. Throws EmptyPolarity when either side has
/// no scorable response.
SubsetScores delta(std::span<const ScoredResponse> cell);

/// Support-weighted F1 over the gold classes {Yes, No}, scorable responses
/// only. Throws NoScorableRecords.
double weighted_f1(std::span<const ScoredResponse> cell);

constexpr double nbs(double delta_ynqa, double delta_mcqa) {
  return 0.5 * (delta_ynqa - delta_mcqa);
}

/// Like delta(), but undefined parts stay empty instead of throwing.
struct CellScore {
  std::optional<double> acc_pos;
  std::optional<double> acc_neg;
  std::optional<double> delta;
  std::optional<double> weighted_f1;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t n_excluded = 0;
};

CellScore score_cell(std::span<const ScoredResponse> cell);

struct CellRow {
  std::string dataset;
  KnowledgeState subset = KnowledgeState::parametric;
  QaFormat format = QaFormat::ynqa;
  ScenarioFlags scenario;
  CellScore score;
};

struct NbsRow {
  std::string dataset;  // "mean" for the cross-dataset rows
  KnowledgeState subset = KnowledgeState::parametric;
  ScenarioFlags scenario;
  std::optional<double> delta_ynqa;
  std::optional<double> delta_mcqa;
  std::optional<double> nbs;
  std::size_t n_datasets = 1;  // datasets contributing to a mean row
};

struct RunReport {
  std::vector<CellRow> cells;  // sorted by dataset, subset, format, scenario
  std::vector<NbsRow> nbs;     // sorted by dataset, subset, scenario
  std::vector<NbsRow> means;   // mean NBS over datasets per (subset, scenario)
};

/// Joins records to their items and scores every populated cell.
/// Throws OrphanRecord for a record whose item is not in `items`.
RunReport score_run(const std::vector<RunRecord>& records, const std::vector<EvalItem>& items);

struct ShiftRow {
  std::string dataset;  // "ALL" rows pool every dataset
  KnowledgeState subset = KnowledgeState::parametric;
  QaFormat format = QaFormat::ynqa;
  ScenarioFlags base;  // scenario of the run without the IDK option
  std::size_t n_yes = 0, yes_to_idk = 0;
  std::size_t n_no = 0, no_to_idk = 0;
  std::size_t n_correct = 0, correct_to_idk = 0;

  [[nodiscard]] std::optional<double> yes_rate() const;
  [[nodiscard]] std::optional<double> no_rate() const;
  [[nodiscard]] std::optional<double> correct_rate() const;
};

struct ShiftTable {
  std::vector<ShiftRow> rows;
};

/// Pairs every base record (with_idk off) with the record for the same item,
/// format, context and CoT flags from the IDK run. Throws MismatchedRuns when
/// the two runs do not pair up one-to-one, and OrphanRecord for unknown items.
ShiftTable prediction_shift(const std::vector<RunRecord>& base,
                            const std::vector<RunRecord>& with_idk,
                            const std::vector<EvalItem>& items);

/// Fixed three-decimal rendering; "—" when undefined.
std::string fmt3(std::optional<double> v);

std::string scores_csv(const RunReport& report);
std::string nbs_csv(const RunReport& report);
std::string shift_csv(const ShiftTable& table);
std::string report_markdown(const RunReport& report);
std::string shift_markdown(const ShiftTable& table);

}  // namespace negbias
