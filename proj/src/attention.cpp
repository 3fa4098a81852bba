#include "negbias/attention.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <tuple>

#include <fmt/format.h>

#include "negbias/errors.hpp"
#include "negbias/jsonl.hpp"
#include "negbias/text.hpp"

namespace negbias {
namespace {

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint64_t payload_floats(const AttnDump& d) {
  return std::uint64_t{d.layers} * d.heads * d.seq_len * 2;
}

}  // namespace

void validate(const AttnDump& d) {
  if (d.layers == 0 || d.heads == 0 || d.seq_len == 0) {
    throw InvariantViolation("layers, heads and seq_len must be positive");
  }
  if (d.instr_len > d.seq_len) {
    throw InvariantViolation(fmt::format("instr_len {} exceeds seq_len {}", d.instr_len, d.seq_len));
  }
  if (d.t_p >= d.instr_len || d.t_n >= d.instr_len) {
    throw InvariantViolation(fmt::format("answer tokens ({}, {}) must precede instr_len {}", d.t_p,
                                         d.t_n, d.instr_len));
  }
  if (d.t_p == d.t_n) throw InvariantViolation("t_p and t_n coincide");
  if (d.values.size() != payload_floats(d)) {
    throw InvariantViolation(fmt::format("{} values for shape [{},{},{},2]", d.values.size(),
                                         d.layers, d.heads, d.seq_len));
  }
  for (std::uint32_t l = 0; l < d.layers; ++l) {
    for (std::uint32_t h = 0; h < d.heads; ++h) {
      for (std::uint32_t i = 0; i < d.seq_len; ++i) {
        for (std::uint32_t c = 0; c < 2; ++c) {
          const double v = d.at(l, h, i, c);
          if (!(v >= 0.0 && v <= 1.0)) {
            throw InvariantViolation(
                fmt::format("value {} at [{},{},{},{}] is outside [0, 1]", v, l, h, i, c));
          }
          const std::uint32_t target = c == 0 ? d.t_p : d.t_n;
          if (i < target && v != 0.0) {
            throw InvariantViolation(fmt::format(
                "position {} attends to later token {} at [{},{},{},{}]", i, target, l, h, i, c));
          }
        }
      }
    }
  }
}

AttnDump parse_dump(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kDumpMagic ||
      std::memcmp(bytes.data(), kDumpMagic, sizeof kDumpMagic) != 0) {
    throw BadMagic("not a NASDUMP1 file");
  }
  if (bytes.size() < kDumpHeaderBytes) throw DimMismatch(kDumpHeaderBytes, bytes.size());
  const std::uint32_t version = get_u32(bytes, 8);
  if (version != kDumpVersion) throw BadVersion(version);

  AttnDump d;
  d.layers = get_u32(bytes, 12);
  d.heads = get_u32(bytes, 16);
  d.seq_len = get_u32(bytes, 20);
  d.instr_len = get_u32(bytes, 24);
  d.t_p = get_u32(bytes, 28);
  d.t_n = get_u32(bytes, 32);

  const std::uint64_t n = payload_floats(d);
  const std::uint64_t expected = kDumpHeaderBytes + 4 * n;
  if (bytes.size() != expected) throw DimMismatch(expected, bytes.size());

  d.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    d.values[k] = std::bit_cast<float>(get_u32(bytes, kDumpHeaderBytes + 4 * k));
  }
  validate(d);
  return d;
}

std::vector<std::uint8_t> serialize_dump(const AttnDump& d) {
  validate(d);
  std::vector<std::uint8_t> out(std::begin(kDumpMagic), std::end(kDumpMagic));
  out.reserve(kDumpHeaderBytes + 4 * d.values.size());
  for (std::uint32_t v : {kDumpVersion, d.layers, d.heads, d.seq_len, d.instr_len, d.t_p, d.t_n}) {
    put_u32(out, v);
  }
  for (double v : d.values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

AttnDump read_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dump " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_dump(bytes);
}

void write_dump(const std::filesystem::path& path, const AttnDump& dump) {
  const auto bytes = serialize_dump(dump);
  jsonl::write_text(path, std::string(bytes.begin(), bytes.end()));
}

double nas(const AttnDump& d, std::uint32_t l, std::uint32_t h, double eps,
           std::optional<std::uint32_t> i_start, std::optional<std::uint32_t> i_end) {
  const std::uint32_t lo = i_start.value_or(d.instr_len);
  const std::uint32_t hi = i_end.value_or(d.seq_len);
  if (l >= d.layers || h >= d.heads) {
    throw IndexOutOfRange(fmt::format("head ({}, {}) outside [{}, {}]", l, h, d.layers, d.heads));
  }
  if (lo > hi || hi > d.seq_len) {
    throw IndexOutOfRange(fmt::format("position range [{}, {}) outside [0, {}]", lo, hi, d.seq_len));
  }
  double sum = 0;
  for (std::uint32_t i = lo; i < hi; ++i) {
    const double a_p = d.at(l, h, i, 0);
    const double a_n = d.at(l, h, i, 1);
    sum += (a_p + a_n) * std::log(std::max(a_n, eps) / std::max(a_p, eps));
  }
  return sum;
}

NasGrid mnas(const AttnDump& d, double eps, std::optional<std::uint32_t> i_start,
             std::optional<std::uint32_t> i_end) {
  NasGrid g;
  g.layers = d.layers;
  g.heads = d.heads;
  g.seq_len = d.seq_len;
  g.nas.reserve(static_cast<std::size_t>(d.layers) * d.heads);
  double total = 0;
  for (std::uint32_t l = 0; l < d.layers; ++l) {
    for (std::uint32_t h = 0; h < d.heads; ++h) {
      g.nas.push_back(nas(d, l, h, eps, i_start, i_end));
      total += g.nas.back();
    }
  }
  g.mnas = total / static_cast<double>(d.seq_len);
  return g;
}

std::string grid_csv(const NasGrid& g) {
  std::string out = fmt::format("# seq_len={}\nlayer,head,nas\n", g.seq_len);
  for (std::uint32_t l = 0; l < g.layers; ++l) {
    for (std::uint32_t h = 0; h < g.heads; ++h) {
      out += fmt::format("{},{},{:.12f}\n", l, h, g.nas[static_cast<std::size_t>(l) * g.heads + h]);
    }
  }
  out += fmt::format("mnas,,{:.12f}\n", g.mnas);
  return out;
}

NasGrid parse_grid_csv(const std::string& csv) {
  NasGrid g;
  bool have_mnas = false;
  std::uint32_t max_layer = 0;
  std::uint32_t max_head = 0;
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> cells;
  std::size_t line_no = 0;
  for (const auto& raw : text::split(csv, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line == "layer,head,nas") continue;
    try {
      if (line.starts_with("# seq_len=")) {
        g.seq_len = static_cast<std::uint32_t>(std::stoul(std::string(line.substr(10))));
        continue;
      }
      const auto f = text::split(line, ',');
      if (f.size() != 3) throw MalformedLine(line_no, "expected three fields");
      if (f[0] == "mnas") {
        g.mnas = std::stod(f[2]);
        have_mnas = true;
        continue;
      }
      const auto l = static_cast<std::uint32_t>(std::stoul(f[0]));
      const auto h = static_cast<std::uint32_t>(std::stoul(f[1]));
      cells.emplace_back(l, h, std::stod(f[2]));
      max_layer = std::max(max_layer, l);
      max_head = std::max(max_head, h);
    } catch (const std::logic_error&) {
      throw MalformedLine(line_no, "bad number in grid");
    }
  }
  if (!have_mnas) throw InputError("grid has no mnas row");
  if (!cells.empty()) {
    g.layers = max_layer + 1;
    g.heads = max_head + 1;
    g.nas.assign(static_cast<std::size_t>(g.layers) * g.heads, 0.0);
    for (const auto& [l, h, v] : cells) g.nas[static_cast<std::size_t>(l) * g.heads + h] = v;
  }
  return g;
}

ScenarioComparison compare_scenarios(const std::vector<NamedGrid>& grids) {
  ScenarioComparison cmp;
  for (const auto& g : grids) {
    cmp.entries.push_back({g.name, g.grid.mnas});
    if (g.grid.layers != grids.front().grid.layers || g.grid.heads != grids.front().grid.heads) {
      cmp.dimension_mismatch = true;
    }
  }
  for (std::size_t j = 1; j < grids.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      cmp.differences.push_back(
          {grids[j].name, grids[i].name, grids[j].grid.mnas - grids[i].grid.mnas});
    }
  }
  return cmp;
}

std::string comparison_csv(const ScenarioComparison& cmp) {
  std::string out = "row,mnas\n";
  for (const auto& e : cmp.entries) out += fmt::format("{},{:.12f}\n", e.name, e.mnas);
  for (const auto& d : cmp.differences) {
    out += fmt::format("{}-{},{:.12f}\n", d.later, d.earlier, d.value);
  }
  return out;
}

}  // namespace negbias
