#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "negbias/core.hpp"
#include "negbias/jsonl.hpp"

namespace negbias {

struct DatasetFile {
  std::filesystem::path path;
  SampleKind kind = SampleKind::yesno;
  std::vector<Sample> samples;
};

enum class KeyPolicy { strict, lenient };

/// Loads a normalized dataset JSONL file. Yes-no answers are normalized to
/// lowercase "yes"/"no". Unknown keys throw under KeyPolicy::strict and are
/// logged under KeyPolicy::lenient.
DatasetFile load_dataset(const std::filesystem::path& path, SampleKind expected_kind,
                         KeyPolicy keys = KeyPolicy::strict);

void write_dataset(const std::filesystem::path& path, const DatasetFile& dataset);

jsonl::Json to_json(const Sample& s);

using TokenEstimator = std::function<std::size_t(std::string_view)>;

/// ceil(chars / 4), counted in bytes.
std::size_t estimate_tokens(std::string_view context);

struct ContextSplit {
  std::vector<Sample> kept;
  std::vector<Sample> dropped;
};

/// Drops samples whose estimated context length exceeds `max_tokens`.
/// Input order is preserved in both halves.
ContextSplit filter_context_length(const std::vector<Sample>& samples,
                                   std::size_t max_tokens = 2048,
                                   const TokenEstimator& estimator = estimate_tokens);

/// Tops up each polarity of one knowledge subset to `min_count` items from
/// `reserve_pool` (pool order, same subset only, ids not already present).
/// Never removes items. Shortfalls after exhausting the pool are logged.
std::vector<EvalItem> balance_subset(std::vector<EvalItem> subset,
                                     const std::vector<EvalItem>& reserve_pool,
                                     std::size_t min_count = 50);

}  // namespace negbias
