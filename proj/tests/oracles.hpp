#pragma once

// Reference computations written straight from the metric definitions, kept
// apart from the library so the tests do not check the code against itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "negbias/attention.hpp"
#include "negbias/metrics.hpp"

namespace negbias::oracle {

struct Confusion {
  // rows: gold yes/no, columns: predicted yes/no
  double yy = 0, yn = 0, ny = 0, nn = 0, excluded = 0;
};

inline Confusion confusion(const std::vector<ScoredResponse>& rs) {
  Confusion c;
  for (const auto& r : rs) {
    if (r.verdict != Verdict::positive && r.verdict != Verdict::negative) {
      c.excluded += 1;
      continue;
    }
    const bool gold_yes = r.gold == Polarity::positive;
    const bool said_yes = r.verdict == Verdict::positive;
    if (gold_yes && said_yes) c.yy += 1;
    if (gold_yes && !said_yes) c.yn += 1;
    if (!gold_yes && said_yes) c.ny += 1;
    if (!gold_yes && !said_yes) c.nn += 1;
  }
  return c;
}

/// Accuracy on gold-No items minus accuracy on gold-Yes items.
inline double delta(const std::vector<ScoredResponse>& rs) {
  const auto c = confusion(rs);
  return c.nn / (c.nn + c.ny) - c.yy / (c.yy + c.yn);
}

inline double f1_from_pr(double tp, double predicted, double actual) {
  const double precision = predicted > 0 ? tp / predicted : 0.0;
  const double recall = actual > 0 ? tp / actual : 0.0;
  return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

inline double weighted_f1(const std::vector<ScoredResponse>& rs) {
  const auto c = confusion(rs);
  const double support_yes = c.yy + c.yn;
  const double support_no = c.ny + c.nn;
  const double f1_yes = f1_from_pr(c.yy, c.yy + c.ny, support_yes);
  const double f1_no = f1_from_pr(c.nn, c.nn + c.yn, support_no);
  return (support_yes * f1_yes + support_no * f1_no) / (support_yes + support_no);
}

/// Random record set of size n in [1, max_n]; `scorable_both` guarantees a
/// scorable record on each polarity.
inline std::vector<ScoredResponse> random_cell(std::mt19937_64& rng, int max_n, bool scorable_both) {
  std::uniform_int_distribution<int> size(scorable_both ? 2 : 1, max_n);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> verdict(0, 3);
  std::vector<ScoredResponse> rs(static_cast<std::size_t>(size(rng)));
  for (auto& r : rs) {
    r.gold = coin(rng) ? Polarity::positive : Polarity::negative;
    r.verdict = static_cast<Verdict>(verdict(rng));
  }
  if (scorable_both) {
    rs[0] = {Polarity::positive, coin(rng) ? Verdict::positive : Verdict::negative};
    rs[1] = {Polarity::negative, coin(rng) ? Verdict::positive : Verdict::negative};
    std::shuffle(rs.begin(), rs.end(), rng);
  }
  return rs;
}

/// Direct transcription of the per-head score, reading the flat buffer.
inline double nas(const AttnDump& d, std::uint32_t l, std::uint32_t h, double eps,
                  std::uint32_t i_start, std::uint32_t i_end) {
  double total = 0;
  for (std::uint32_t i = i_start; i < i_end; ++i) {
    const std::size_t base = ((std::size_t{l} * d.heads + h) * d.seq_len + i) * 2;
    const double ap = d.values[base];
    const double an = d.values[base + 1];
    total += (ap + an) * std::log(std::max(an, eps) / std::max(ap, eps));
  }
  return total;
}

inline double mnas(const AttnDump& d, double eps) {
  double sum = 0;
  for (std::uint32_t l = 0; l < d.layers; ++l) {
    for (std::uint32_t h = 0; h < d.heads; ++h) sum += nas(d, l, h, eps, d.instr_len, d.seq_len);
  }
  return sum / d.seq_len;
}

/// Random dump satisfying every invariant. `floor` > 0 keeps live values
/// away from zero.
inline AttnDump random_dump(std::mt19937_64& rng, std::uint32_t max_lh = 4, std::uint32_t max_m = 32,
                            float floor = 0.0F) {
  std::uniform_int_distribution<std::uint32_t> lh(1, max_lh);
  std::uniform_int_distribution<std::uint32_t> m(2, max_m);
  AttnDump d;
  d.layers = lh(rng);
  d.heads = lh(rng);
  d.seq_len = m(rng);
  d.instr_len = std::uniform_int_distribution<std::uint32_t>(2, d.seq_len)(rng);
  std::uniform_int_distribution<std::uint32_t> pos(0, d.instr_len - 1);
  d.t_p = pos(rng);
  do d.t_n = pos(rng);
  while (d.t_n == d.t_p);
  std::uniform_real_distribution<float> value(floor, 1.0F);
  d.values.resize(std::size_t{d.layers} * d.heads * d.seq_len * 2);
  for (std::uint32_t l = 0; l < d.layers; ++l) {
    for (std::uint32_t h = 0; h < d.heads; ++h) {
      for (std::uint32_t i = 0; i < d.seq_len; ++i) {
        d.at(l, h, i, 0) = i < d.t_p ? 0.0F : value(rng);
        d.at(l, h, i, 1) = i < d.t_n ? 0.0F : value(rng);
      }
    }
  }
  return d;
}

}  // namespace negbias::oracle
