#include "negbias/dataset.hpp"

#include <array>
#include <stdexcept>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "negbias/errors.hpp"
#include "negbias/text.hpp"

namespace negbias {
namespace {

constexpr std::array<std::string_view, 6> kSampleKeys{"id",       "dataset", "kind",
                                                      "question", "answer",  "context"};

Sample parse_sample(const jsonl::Json& j, std::size_t line_no, KeyPolicy keys) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto k : kSampleKeys) known = known || key == k;
    if (known) continue;
    if (keys == KeyPolicy::strict) throw MalformedLine(line_no, "unknown key '" + key + "'");
    spdlog::warn("line {}: ignoring unknown key '{}'", line_no, key);
  }

  Sample s;
  s.id = jsonl::get_string(j, "id", line_no);
  if (s.id.empty()) throw MalformedLine(line_no, "empty id");
  s.dataset = jsonl::get_string(j, "dataset", line_no);
  const auto kind = parse_kind(jsonl::get_string(j, "kind", line_no));
  if (!kind) throw MalformedLine(line_no, "kind must be \"yesno\" or \"short\"");
  s.kind = *kind;
  s.question = jsonl::get_string(j, "question", line_no);
  s.answer = jsonl::get_string(j, "answer", line_no);
  s.context = jsonl::get_string(j, "context", line_no);
  return s;
}

}  // namespace

DatasetFile load_dataset(const std::filesystem::path& path, SampleKind expected_kind,
                         KeyPolicy keys) {
  DatasetFile file{path, expected_kind, {}};
  std::unordered_set<std::string> seen;
  jsonl::for_each(path, [&](const jsonl::Json& j, std::size_t line_no) {
    Sample s;
    try {
      s = parse_sample(j, line_no, keys);
    } catch (const MalformedLine& e) {
      spdlog::error("{}: rejected {}", path.string(), e.what());
      throw;
    }
    if (s.kind != expected_kind) {
      throw KindMismatch(s.id, "declared " + std::string(to_string(s.kind)) + ", expected " +
                                   std::string(to_string(expected_kind)));
    }
    if (s.kind == SampleKind::yesno) {
      const auto a = text::lower(text::trim(s.answer));
      if (a != "yes" && a != "no") {
        throw KindMismatch(s.id, "yes-no answer must be yes or no, got '" + s.answer + "'");
      }
      s.answer = a;
    }
    if (!seen.insert(s.id).second) throw DuplicateId(s.id);
    file.samples.push_back(std::move(s));
  });
  return file;
}

jsonl::Json to_json(const Sample& s) {
  return {{"id", s.id},
          {"dataset", s.dataset},
          {"kind", std::string(to_string(s.kind))},
          {"question", s.question},
          {"answer", s.answer},
          {"context", s.context}};
}

void write_dataset(const std::filesystem::path& path, const DatasetFile& dataset) {
  std::vector<jsonl::Json> out;
  out.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) out.push_back(to_json(s));
  jsonl::write(path, out);
}

std::size_t estimate_tokens(std::string_view context) { return (context.size() + 3) / 4; }

ContextSplit filter_context_length(const std::vector<Sample>& samples, std::size_t max_tokens,
                                   const TokenEstimator& estimator) {
  if (max_tokens == 0) throw std::invalid_argument("max_tokens must be positive");
  ContextSplit split;
  for (const auto& s : samples) {
    if (estimator(s.context) > max_tokens) {
      split.dropped.push_back(s);
    } else {
      split.kept.push_back(s);
    }
  }
  return split;
}

std::vector<EvalItem> balance_subset(std::vector<EvalItem> subset,
                                     const std::vector<EvalItem>& reserve_pool,
                                     std::size_t min_count) {
  if (subset.empty() && reserve_pool.empty()) return subset;
  const KnowledgeState state = subset.empty() ? reserve_pool.front().subset : subset.front().subset;

  std::unordered_set<std::string> ids;
  std::array<std::size_t, 2> counts{0, 0};
  for (const auto& item : subset) {
    ids.insert(item.id);
    ++counts[item.polarity == Polarity::positive ? 0 : 1];
  }

  for (auto polarity : {Polarity::positive, Polarity::negative}) {
    auto& count = counts[polarity == Polarity::positive ? 0 : 1];
    for (const auto& candidate : reserve_pool) {
      if (count >= min_count) break;
      if (candidate.subset != state || candidate.polarity != polarity) continue;
      if (!ids.insert(candidate.id).second) continue;
      subset.push_back(candidate);
      ++count;
    }
    if (count < min_count) {
      spdlog::warn("subset {}: only {} {} items after exhausting the reserve pool (wanted {})",
                   to_string(state), count, to_string(polarity), min_count);
    }
  }
  return subset;
}

}  // namespace negbias
