#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace negbias {

/// Attention columns for the positive and negative answer tokens of one
/// sequence. values is laid out [layer][head][position][channel], channel 0
/// being attention to t_p and channel 1 attention to t_n. Files carry float32;
/// values read from a file widen exactly, and writing narrows to float32.
struct AttnDump {
  std::uint32_t layers = 0;
  std::uint32_t heads = 0;
  std::uint32_t seq_len = 0;    // M
  std::uint32_t instr_len = 0;  // N_I, first position after the instruction
  std::uint32_t t_p = 0;
  std::uint32_t t_n = 0;
  std::vector<double> values;

  [[nodiscard]] std::size_t offset(std::uint32_t l, std::uint32_t h, std::uint32_t i,
                                   std::uint32_t c) const {
    return ((static_cast<std::size_t>(l) * heads + h) * seq_len + i) * 2 + c;
  }
  [[nodiscard]] double at(std::uint32_t l, std::uint32_t h, std::uint32_t i,
                         std::uint32_t c) const {
    return values[offset(l, h, i, c)];
  }
  double& at(std::uint32_t l, std::uint32_t h, std::uint32_t i, std::uint32_t c) {
    return values[offset(l, h, i, c)];
  }

  friend bool operator==(const AttnDump&, const AttnDump&) = default;
};

inline constexpr char kDumpMagic[8] = {'N', 'A', 'S', 'D', 'U', 'M', 'P', '1'};
inline constexpr std::uint32_t kDumpVersion = 1;
inline constexpr std::size_t kDumpHeaderBytes = 36;

/// Throws InvariantViolation describing the first broken invariant.
void validate(const AttnDump& dump);

/// Parses and validates NASDUMP1 bytes.
AttnDump parse_dump(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_dump(const AttnDump& dump);

AttnDump read_dump(const std::filesystem::path& path);
void write_dump(const std::filesystem::path& path, const AttnDump& dump);

inline constexpr double kNasEps = 1e-12;

/// Negative attention score of head (l, h), summed over positions
/// [i_start, i_end). Defaults cover [instr_len, seq_len).
double nas(const AttnDump& dump, std::uint32_t l, std::uint32_t h, double eps = kNasEps,
           std::optional<std::uint32_t> i_start = std::nullopt,
           std::optional<std::uint32_t> i_end = std::nullopt);

struct NasGrid {
  std::uint32_t layers = 0;
  std::uint32_t heads = 0;
  std::uint32_t seq_len = 0;
  std::vector<double> nas;  // [layer][head]
  double mnas = 0;          // sum of nas divided by seq_len
};

NasGrid mnas(const AttnDump& dump, double eps = kNasEps,
             std::optional<std::uint32_t> i_start = std::nullopt,
             std::optional<std::uint32_t> i_end = std::nullopt);

/// "layer,head,nas" rows, then a final "mnas,,<value>" row.
std::string grid_csv(const NasGrid& grid);
/// Reads grid_csv output back.
NasGrid parse_grid_csv(const std::string& csv);

struct NamedGrid {
  std::string name;
  NasGrid grid;
};

struct ScenarioComparison {
  struct Entry {
    std::string name;
    double mnas = 0;
  };
  struct Difference {
    std::string later;
    std::string earlier;
    double value = 0;  // later - earlier
  };
  std::vector<Entry> entries;
  std::vector<Difference> differences;  // every pair, in input order
  bool dimension_mismatch = false;
};

ScenarioComparison compare_scenarios(const std::vector<NamedGrid>& grids);
std::string comparison_csv(const ScenarioComparison& cmp);

}  // namespace negbias
