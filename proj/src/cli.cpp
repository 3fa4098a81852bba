#include "negbias/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "negbias/attention.hpp"
#include "negbias/dataset.hpp"
#include "negbias/errors.hpp"
#include "negbias/evalset.hpp"
#include "negbias/gateway.hpp"
#include "negbias/metrics.hpp"
#include "negbias/parallel.hpp"
#include "negbias/probe.hpp"
#include "negbias/rng.hpp"
#include "negbias/scenario.hpp"
#include "negbias/text.hpp"

namespace fs = std::filesystem;

namespace negbias {
namespace {

struct Settings {
  std::uint64_t seed = 17;
  fs::path out = "out";
  std::string log_level = "warn";

  std::string provider_url;
  std::string model = "target";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string scripted;
  std::string judge_url;
  std::string judge_model;
  std::string judge_api_key_env;
  std::string judge_scripted;
  int concurrency = 4;
  double temperature = 0.0;
  int max_tokens = 1024;
  int max_retries = 4;
  std::string cache_dir;
  std::vector<std::string> datasets;
  bool lenient_keys = false;

  // probe
  std::size_t max_context_tokens = 2048;
  // probe / categorize / build / run / score / shift / report artifact paths
  std::string probes;
  std::string categorized;
  std::string evalset;
  std::string records;
  // build
  std::vector<std::string> reserve;
  std::size_t min_count = 50;
  std::string balance = "short";
  int max_attempts = 5;
  double retry_temperature = 1.0;
  // run
  std::vector<std::string> formats;
  std::vector<std::string> scenarios;
  // shift / report
  std::string base;
  std::string idk;
  std::vector<std::string> nas_grids;
  // nas
  std::string dump;
  std::string grid_out;
  double eps = kNasEps;
  std::int64_t i_start = -1;  // -1: default bound
  std::int64_t i_end = -1;
};

fs::path artifact(const Settings& s, const std::string& given, const char* name) {
  return given.empty() ? s.out / name : fs::path(given);
}

void setup_logging(const std::string& level) {
  static const auto logger = [] {
    auto l = std::make_shared<spdlog::logger>("negbias",
                                              std::make_shared<spdlog::sinks::stderr_sink_mt>());
    spdlog::set_default_logger(l);
    return l;
  }();
  logger->set_level(spdlog::level::from_str(level));
}

// -- providers ---------------------------------------------------------------

std::shared_ptr<Provider> make_provider(const std::string& url, const std::string& key_env,
                                        const std::string& scripted) {
  if (!scripted.empty()) {
    if (!fs::exists(scripted)) throw InputError("scripted provider file not found: " + scripted);
    return std::make_shared<ScriptedProvider>(ScriptedProvider::from_file(scripted));
  }
  if (url.empty()) throw InputError("no provider: pass --provider-url or --scripted");
  std::string key;
  if (const char* v = std::getenv(key_env.c_str())) key = v;
  if (key.empty()) spdlog::warn("environment variable {} is empty; sending no API key", key_env);
  return std::make_shared<HttpProvider>(HttpProviderConfig{url, key, std::chrono::seconds(120)});
}

GatewayOptions gateway_options(const Settings& s, std::string model) {
  GatewayOptions o;
  o.model = std::move(model);
  o.temperature = s.temperature;
  o.max_tokens = s.max_tokens;
  o.concurrency = s.concurrency;
  o.retry.max_attempts = s.max_retries;
  if (!s.cache_dir.empty()) o.cache_dir = s.cache_dir;
  return o;
}

std::unique_ptr<Gateway> target_gateway(const Settings& s) {
  return std::make_unique<Gateway>(make_provider(s.provider_url, s.api_key_env, s.scripted),
                                   gateway_options(s, s.model));
}

std::unique_ptr<Gateway> judge_gateway(const Settings& s) {
  const bool own = !s.judge_url.empty() || !s.judge_scripted.empty();
  auto provider = own ? make_provider(s.judge_url,
                                      s.judge_api_key_env.empty() ? s.api_key_env
                                                                  : s.judge_api_key_env,
                                      s.judge_scripted)
                      : make_provider(s.provider_url, s.api_key_env, s.scripted);
  return std::make_unique<Gateway>(std::move(provider),
                                   gateway_options(s, s.judge_model.empty() ? s.model
                                                                            : s.judge_model));
}

// -- inputs ------------------------------------------------------------------

SampleKind sniff_kind(const fs::path& path) {
  std::optional<SampleKind> kind;
  jsonl::for_each(path, [&](const jsonl::Json& j, std::size_t line_no) {
    if (kind) return;
    kind = parse_kind(jsonl::get_string(j, "kind", line_no));
    if (!kind) throw MalformedLine(line_no, "kind must be \"yesno\" or \"short\"");
  });
  return kind.value_or(SampleKind::yesno);
}

std::vector<Sample> load_samples(const Settings& s) {
  if (s.datasets.empty()) throw InputError("no --dataset given");
  std::vector<Sample> all;
  std::unordered_set<std::string> ids;
  for (const auto& path : s.datasets) {
    auto file = load_dataset(path, sniff_kind(path),
                             s.lenient_keys ? KeyPolicy::lenient : KeyPolicy::strict);
    for (auto& sample : file.samples) {
      if (!ids.insert(sample.id).second) throw DuplicateId(sample.id);
      all.push_back(std::move(sample));
    }
  }
  return all;
}

std::vector<ProbeResult> load_probes(const fs::path& path) {
  std::vector<ProbeResult> out;
  jsonl::for_each(path, [&](const jsonl::Json& j, std::size_t line_no) {
    out.push_back(probe_from_json(j, line_no));
  });
  return out;
}

void write_probes(const fs::path& path, const std::vector<ProbeResult>& results) {
  std::vector<jsonl::Json> lines;
  lines.reserve(results.size());
  for (const auto& r : results) lines.push_back(to_json(r));
  jsonl::write(path, lines);
}

std::unordered_map<std::string, const Sample*> by_id(const std::vector<Sample>& samples) {
  std::unordered_map<std::string, const Sample*> m;
  for (const auto& s : samples) m.emplace(s.id, &s);
  return m;
}

const Sample& sample_for(const std::unordered_map<std::string, const Sample*>& m,
                         const std::string& id) {
  const auto it = m.find(id);
  if (it == m.end()) throw OrphanRecord(id);
  return *it->second;
}

bool is_provider_failure(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ProviderError&) {
    return true;
  } catch (...) {
    return false;
  }
}

int systemic(std::size_t total, std::size_t provider_failures, const char* stage) {
  if (total > 0 && provider_failures == total) {
    spdlog::error("{}: every request failed at the provider", stage);
    return kExitProvider;
  }
  return kExitOk;
}

// -- stages ------------------------------------------------------------------

int cmd_probe(const Settings& s) {
  const auto samples = load_samples(s);
  const auto split = filter_context_length(samples, s.max_context_tokens);
  if (!split.dropped.empty()) {
    spdlog::info("dropped {} samples with context above {} estimated tokens", split.dropped.size(),
                 s.max_context_tokens);
  }
  auto target = target_gateway(s);
  auto judge = judge_gateway(s);

  const auto& kept = split.kept;
  std::vector<ProbeResult> results(kept.size());
  std::vector<char> provider_failed(kept.size(), 0);
  parallel_for(kept.size(), s.concurrency, [&](std::size_t k) {
    const Sample& sample = kept[k];
    try {
      if (sample.kind == SampleKind::yesno) {
        const auto pair = make_statement_pair(sample.question, *judge, "stmt-" + sample.id);
        results[k] = probe_yesno(sample, pair, *target, s.seed);
      } else {
        results[k] = probe_short(sample, *target);
      }
    } catch (const Error& e) {
      spdlog::warn("{}: probe failed: {}", sample.id, e.what());
      results[k] = ProbeResult{};
      results[k].sample_id = sample.id;
      results[k].kind = sample.kind;
      results[k].error = e.what();
      provider_failed[k] = is_provider_failure(std::current_exception()) ? 1 : 0;
    }
  });

  write_probes(artifact(s, s.probes, "probes.jsonl"), results);
  std::size_t failures = 0;
  for (char f : provider_failed) failures += f != 0 ? 1 : 0;
  return systemic(results.size(), failures, "probe");
}

int cmd_categorize(const Settings& s) {
  const auto samples = load_samples(s);
  const auto index = by_id(samples);
  auto results = load_probes(artifact(s, s.probes, "probes.jsonl"));
  for (const auto& r : results) sample_for(index, r.sample_id);
  auto judge = judge_gateway(s);

  std::vector<char> provider_failed(results.size(), 0);
  parallel_for(results.size(), s.concurrency, [&](std::size_t k) {
    auto& r = results[k];
    r.state.reset();
    if (!r.error.empty()) return;
    const Sample& sample = sample_for(index, r.sample_id);
    try {
      if (r.kind == SampleKind::yesno) {
        if (r.consistent) r.state = categorize(r, sample.answer);
        return;
      }
      if (!r.prediction) return;
      if (!r.is_idk() && !r.judge_verdict) {
        r.judge_verdict = verify_short_answer(sample.question, *r.prediction, sample.answer,
                                              *judge, "verify-" + sample.id);
      }
      r.state = categorize(r, sample.answer);
    } catch (const Error& e) {
      spdlog::warn("{}: categorization failed: {}", r.sample_id, e.what());
      r.error = e.what();
      provider_failed[k] = is_provider_failure(std::current_exception()) ? 1 : 0;
    }
  });

  write_probes(artifact(s, s.categorized, "categorized.jsonl"), results);

  struct Row {
    std::size_t parametric = 0, counter = 0, absent = 0, inconsistent = 0, failed = 0;
  };
  std::map<std::pair<std::string, std::string>, Row> stats;
  for (const auto& r : results) {
    const Sample& sample = sample_for(index, r.sample_id);
    auto& row = stats[{sample.dataset, std::string(to_string(sample.kind))}];
    if (!r.error.empty()) ++row.failed;
    else if (!r.state) ++row.inconsistent;
    else if (*r.state == KnowledgeState::parametric) ++row.parametric;
    else if (*r.state == KnowledgeState::counter_parametric) ++row.counter;
    else ++row.absent;
  }
  std::string csv = "dataset,kind,parametric,counter_parametric,absent,inconsistent,failed\n";
  for (const auto& [key, row] : stats) {
    csv += fmt::format("{},{},{},{},{},{},{}\n", key.first, key.second, row.parametric,
                       row.counter, row.absent, row.inconsistent, row.failed);
  }
  jsonl::write_text(s.out / "stats.csv", csv);

  std::size_t failures = 0;
  for (char f : provider_failed) failures += f != 0 ? 1 : 0;
  return systemic(results.size(), failures, "categorize");
}

std::string evalset_stats_csv(const std::vector<EvalItem>& items) {
  std::map<std::pair<std::string, KnowledgeState>, std::array<std::size_t, 2>> counts;
  for (const auto& it : items) {
    ++counts[{it.dataset, it.subset}][it.polarity == Polarity::positive ? 0 : 1];
  }
  std::string csv = "dataset,subset,positive,negative\n";
  for (const auto& [key, c] : counts) {
    csv += fmt::format("{},{},{},{}\n", key.first, to_string(key.second), c[0], c[1]);
  }
  return csv;
}

/// Short-answer samples carry no natural polarity: inside every
/// (dataset, subset) cell a seeded shuffle alternates positive and negative.
std::vector<Polarity> assign_short_polarity(const std::vector<std::pair<std::string, KnowledgeState>>& cells,
                                            std::uint64_t seed) {
  std::map<std::pair<std::string, KnowledgeState>, std::vector<std::size_t>> members;
  for (std::size_t k = 0; k < cells.size(); ++k) members[cells[k]].push_back(k);
  std::vector<Polarity> out(cells.size(), Polarity::positive);
  for (auto& [cell, idx] : members) {
    SeededStream rng(seed, "short-polarity", cell.first + "/" + std::string(to_string(cell.second)));
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      out[idx[j]] = j % 2 == 0 ? Polarity::positive : Polarity::negative;
    }
  }
  return out;
}

int cmd_build(const Settings& s) {
  if (s.balance != "short" && s.balance != "all" && s.balance != "none") {
    throw InputError("--balance must be short, all or none");
  }
  const auto samples = load_samples(s);
  const auto index = by_id(samples);
  const auto results = load_probes(artifact(s, s.categorized, "categorized.jsonl"));
  auto judge = judge_gateway(s);

  std::vector<const ProbeResult*> usable;
  for (const auto& r : results) {
    sample_for(index, r.sample_id);
    if (r.state && r.error.empty()) usable.push_back(&r);
  }

  // Judge-side generation for short-answer samples.
  std::vector<std::optional<GeneratedNegatives>> negs(usable.size());
  std::vector<std::string> failure(usable.size());
  std::vector<char> provider_failed(usable.size(), 0);
  parallel_for(usable.size(), s.concurrency, [&](std::size_t k) {
    const auto& r = *usable[k];
    if (r.kind != SampleKind::short_answer) return;
    const Sample& sample = sample_for(index, r.sample_id);
    try {
      negs[k] = generate_negatives(sample, r.prediction.value_or(""), *judge, s.max_attempts,
                                   s.retry_temperature);
    } catch (const Error& e) {
      spdlog::warn("{}: build failed: {}", sample.id, e.what());
      failure[k] = e.what();
      provider_failed[k] = is_provider_failure(std::current_exception()) ? 1 : 0;
    }
  });

  std::vector<std::pair<std::string, KnowledgeState>> short_cells;
  std::vector<std::size_t> short_slots;
  for (std::size_t k = 0; k < usable.size(); ++k) {
    if (negs[k]) {
      short_cells.emplace_back(sample_for(index, usable[k]->sample_id).dataset, *usable[k]->state);
      short_slots.push_back(k);
    }
  }
  const auto short_polarity = assign_short_polarity(short_cells, s.seed);
  std::vector<Polarity> polarity_of(usable.size(), Polarity::positive);
  for (std::size_t j = 0; j < short_slots.size(); ++j) polarity_of[short_slots[j]] = short_polarity[j];

  std::vector<EvalItem> items;
  std::unordered_set<std::string> short_ids;
  std::vector<jsonl::Json> skipped;
  for (std::size_t k = 0; k < usable.size(); ++k) {
    const auto& r = *usable[k];
    const Sample& sample = sample_for(index, r.sample_id);
    if (r.kind == SampleKind::yesno) {
      if (!r.pair) {
        skipped.push_back({{"id", r.sample_id}, {"error", "probe record has no statement pair"}});
        continue;
      }
      items.push_back(build_item_yesno(sample, *r.pair, *r.state, s.seed));
    } else if (negs[k]) {
      items.push_back(build_item_short(sample, *negs[k], *r.state, polarity_of[k], s.seed));
      short_ids.insert(sample.id);
    } else {
      skipped.push_back({{"id", r.sample_id}, {"error", failure[k]}});
    }
  }

  if (!s.reserve.empty()) {
    std::vector<EvalItem> pool;
    for (const auto& path : s.reserve) {
      auto more = load_evalset(path);
      pool.insert(pool.end(), more.begin(), more.end());
    }
    std::vector<std::pair<std::string, KnowledgeState>> order;
    std::map<std::pair<std::string, KnowledgeState>, std::vector<EvalItem>> groups;
    for (auto& it : items) {
      const auto key = std::pair{it.dataset, it.subset};
      if (!groups.contains(key)) order.push_back(key);
      groups[key].push_back(std::move(it));
    }
    items.clear();
    for (const auto& key : order) {
      std::vector<EvalItem> same;
      for (const auto& p : pool) {
        if (p.dataset == key.first && p.subset == key.second) same.push_back(p);
      }
      auto grown = balance_subset(std::move(groups[key]), same, s.min_count);
      items.insert(items.end(), grown.begin(), grown.end());
    }
  }

  if (s.balance == "all") {
    items = balance_polarity(items, s.seed);
  } else if (s.balance == "short") {
    std::vector<EvalItem> shorts;
    for (const auto& it : items) {
      if (short_ids.contains(it.id)) shorts.push_back(it);
    }
    std::unordered_set<std::string> kept;
    for (const auto& it : balance_polarity(shorts, s.seed)) kept.insert(it.id);
    std::erase_if(items, [&](const EvalItem& it) {
      return short_ids.contains(it.id) && !kept.contains(it.id);
    });
  }

  write_evalset(artifact(s, s.evalset, "evalset.jsonl"), items);
  jsonl::write_text(s.out / "evalset_stats.csv", evalset_stats_csv(items));
  jsonl::write(s.out / "skipped.jsonl", skipped);

  std::size_t failures = 0;
  std::size_t attempted = 0;
  for (std::size_t k = 0; k < usable.size(); ++k) {
    attempted += usable[k]->kind == SampleKind::short_answer ? 1 : 0;
    failures += provider_failed[k] != 0 ? 1 : 0;
  }
  return systemic(attempted, failures, "build");
}

std::vector<QaFormat> parse_formats(const std::vector<std::string>& names) {
  if (names.empty()) return {kAllFormats.begin(), kAllFormats.end()};
  std::vector<QaFormat> out;
  for (const auto& n : names) {
    const auto f = parse_format(n);
    if (!f) throw InputError("unknown format: " + n);
    out.push_back(*f);
  }
  return out;
}

std::vector<ScenarioFlags> parse_scenarios(const std::vector<std::string>& names) {
  std::vector<ScenarioFlags> out;
  if (names.empty()) {
    for (int i = 0; i < 8; ++i) out.push_back(ScenarioFlags::from_index(i));
    return out;
  }
  for (const auto& n : names) {
    const auto f = parse_scenario_id(n);
    if (!f) throw InputError("unknown scenario: " + n);
    out.push_back(*f);
  }
  return out;
}

int cmd_run(const Settings& s) {
  const auto items = load_evalset(artifact(s, s.evalset, "evalset.jsonl"));
  auto target = target_gateway(s);
  const auto records =
      run_evalset(items, parse_formats(s.formats), parse_scenarios(s.scenarios), *target);
  write_records(artifact(s, s.records, "runs.jsonl"), records);
  std::size_t failures = 0;
  for (const auto& r : records) failures += r.error.empty() ? 0 : 1;
  return systemic(records.size(), failures, "run");
}

int cmd_score(const Settings& s) {
  const auto items = load_evalset(artifact(s, s.evalset, "evalset.jsonl"));
  const auto records = load_records(artifact(s, s.records, "runs.jsonl"));
  const auto report = score_run(records, items);
  jsonl::write_text(s.out / "scores.csv", scores_csv(report));
  jsonl::write_text(s.out / "nbs.csv", nbs_csv(report));
  jsonl::write_text(s.out / "report.md", "# Negative bias scores\n\n" + report_markdown(report));
  return kExitOk;
}

std::pair<std::vector<RunRecord>, std::vector<RunRecord>> split_by_idk(
    const std::vector<RunRecord>& records) {
  std::pair<std::vector<RunRecord>, std::vector<RunRecord>> out;
  for (const auto& r : records) (r.scenario.with_idk ? out.second : out.first).push_back(r);
  return out;
}

int cmd_shift(const Settings& s) {
  const auto items = load_evalset(artifact(s, s.evalset, "evalset.jsonl"));
  std::vector<RunRecord> base;
  std::vector<RunRecord> idk;
  if (!s.base.empty() || !s.idk.empty()) {
    if (s.base.empty() || s.idk.empty()) throw InputError("--base and --idk go together");
    base = load_records(s.base);
    idk = load_records(s.idk);
  } else {
    std::tie(base, idk) = split_by_idk(load_records(artifact(s, s.records, "runs.jsonl")));
  }
  jsonl::write_text(s.out / "shift.csv", shift_csv(prediction_shift(base, idk, items)));
  return kExitOk;
}

int cmd_nas(const Settings& s) {
  if (s.dump.empty()) throw InputError("--dump is required");
  const auto dump = read_dump(s.dump);
  const auto bound = [](std::int64_t v) {
    return v < 0 ? std::nullopt : std::optional(static_cast<std::uint32_t>(v));
  };
  const auto grid = mnas(dump, s.eps, bound(s.i_start), bound(s.i_end));
  jsonl::write_text(s.grid_out.empty() ? s.out / "grid.csv" : fs::path(s.grid_out),
                    grid_csv(grid));
  return kExitOk;
}

std::pair<std::string, fs::path> split_label(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) return {fs::path(arg).stem().string(), arg};
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

int cmd_report(const Settings& s) {
  const auto items = load_evalset(artifact(s, s.evalset, "evalset.jsonl"));
  const auto records = load_records(artifact(s, s.records, "runs.jsonl"));
  const auto report = score_run(records, items);

  std::string md = "# Negative bias report\n\n## Evaluation set\n\n";
  {
    std::map<std::pair<std::string, KnowledgeState>, std::array<std::size_t, 2>> counts;
    for (const auto& it : items) {
      ++counts[{it.dataset, it.subset}][it.polarity == Polarity::positive ? 0 : 1];
    }
    md += "| Dataset | Subset | Positive | Negative |\n|---|---|---|---|\n";
    for (const auto& [key, c] : counts) {
      md += fmt::format("| {} | {} | {} | {} |\n", key.first, to_string(key.second), c[0], c[1]);
    }
    md += '\n';
  }

  md += "## NBS by subset (mean over datasets)\n\n";
  std::string plot_nbs = "scenario,subset,dataset,nbs\n";
  {
    std::map<int, std::map<KnowledgeState, const NbsRow*>> grid;
    for (const auto& r : report.means) grid[r.scenario.index()][r.subset] = &r;
    if (grid.empty()) {
      md += "No scenario has both MCQA and YNQA deltas.\n\n";
    } else {
      md += "| Scenario | parametric | counter_parametric | absent |\n|---|---|---|---|\n";
      for (const auto& [scenario, by_subset] : grid) {
        md += "| " + scenario_id(ScenarioFlags::from_index(scenario));
        for (auto state : kAllStates) {
          const auto it = by_subset.find(state);
          md += " | " + fmt3(it == by_subset.end() ? std::nullopt : it->second->nbs);
        }
        md += " |\n";
      }
      md += '\n';
    }
    for (const auto* rows : {&report.nbs, &report.means}) {
      for (const auto& r : *rows) {
        if (!r.nbs) continue;
        plot_nbs += fmt::format("{},{},{},{:.6f}\n", scenario_id(r.scenario), to_string(r.subset),
                                r.dataset, *r.nbs);
      }
    }
  }

  md += "## Scores per dataset\n\n" + report_markdown(report);

  md += "## Prediction shift\n\n";
  {
    std::vector<RunRecord> base;
    std::vector<RunRecord> idk;
    if (!s.base.empty() && !s.idk.empty()) {
      base = load_records(s.base);
      idk = load_records(s.idk);
    } else {
      std::tie(base, idk) = split_by_idk(records);
    }
    if (base.empty() || idk.empty()) {
      md += "not computed (no paired runs with and without the IDK option)\n\n";
    } else {
      try {
        md += shift_markdown(prediction_shift(base, idk, items)) + '\n';
      } catch (const MismatchedRuns& e) {
        md += fmt::format("not computed ({})\n\n", e.what());
      }
    }
  }

  md += "## Negative attention score\n\n";
  if (s.nas_grids.empty()) {
    md += "not computed\n";
  } else {
    std::vector<NamedGrid> grids;
    for (const auto& arg : s.nas_grids) {
      auto [label, path] = split_label(arg);
      grids.push_back({label, parse_grid_csv(jsonl::read_text(path))});
    }
    const auto cmp = compare_scenarios(grids);
    md += "| Scenario | mNAS |\n|---|---|\n";
    for (const auto& e : cmp.entries) md += fmt::format("| {} | {} |\n", e.name, fmt3(e.mnas));
    if (!cmp.differences.empty()) {
      md += "\n| Comparison | ΔmNAS |\n|---|---|\n";
      for (const auto& d : cmp.differences) {
        md += fmt::format("| {} − {} | {} |\n", d.later, d.earlier, fmt3(d.value));
      }
    }
    if (cmp.dimension_mismatch) {
      md += "\nGrids differ in layer/head shape; only the mNAS scalars are comparable.\n";
    }
    jsonl::write_text(s.out / "plot_mnas.csv", comparison_csv(cmp));
  }

  jsonl::write_text(s.out / "report.md", md);
  jsonl::write_text(s.out / "plot_nbs.csv", plot_nbs);
  return kExitOk;
}

// -- command line ------------------------------------------------------------

void add_provider_options(CLI::App& app, Settings& s) {
  app.add_option("--provider-url", s.provider_url, "Chat-completions base URL");
  app.add_option("--model", s.model, "Target model name");
  app.add_option("--api-key-env", s.api_key_env, "Environment variable holding the API key");
  app.add_option("--scripted", s.scripted, "Scripted provider file (replaces the endpoint)");
  app.add_option("--judge-url", s.judge_url, "Judge endpoint (defaults to the target's)");
  app.add_option("--judge-model", s.judge_model, "Judge model name (defaults to --model)");
  app.add_option("--judge-api-key-env", s.judge_api_key_env, "Judge API key variable");
  app.add_option("--judge-scripted", s.judge_scripted, "Scripted judge file");
  app.add_option("--concurrency", s.concurrency, "Max in-flight provider calls")
      ->check(CLI::PositiveNumber);
  app.add_option("--temperature", s.temperature, "Sampling temperature")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--max-tokens", s.max_tokens, "Completion token limit")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-retries", s.max_retries, "Attempts per request")
      ->check(CLI::PositiveNumber);
  app.add_option("--cache-dir", s.cache_dir, "Response cache directory");
  app.add_option("--dataset", s.datasets, "Normalized dataset JSONL (repeatable)");
  app.add_flag("--lenient-keys", s.lenient_keys, "Log unknown dataset keys instead of failing");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  Settings s;
  CLI::App app{"Format-level negative bias measurement", "negbias"};
  app.set_config("--config", "", "Flat key = value config file");
  app.option_defaults()->always_capture_default();
  app.fallthrough();
  app.require_subcommand(1);

  app.add_option("--seed", s.seed, "Seed for every shuffled decision");
  app.add_option("--out", s.out, "Output directory");
  app.add_option("--log-level", s.log_level, "trace, debug, info, warn, error, off");
  add_provider_options(app, s);

  auto* probe = app.add_subcommand("probe", "Probe parametric knowledge");
  probe->add_option("--max-context-tokens", s.max_context_tokens, "Context length filter")
      ->check(CLI::PositiveNumber);
  probe->add_option("--probes", s.probes, "Output probe JSONL");

  auto* categorize = app.add_subcommand("categorize", "Verify answers and assign knowledge states");
  categorize->add_option("--probes", s.probes, "Probe JSONL");
  categorize->add_option("--categorized", s.categorized, "Output JSONL");

  auto* build = app.add_subcommand("build", "Build the evaluation set");
  build->add_option("--categorized", s.categorized, "Categorized probe JSONL");
  build->add_option("--evalset", s.evalset, "Output evaluation-set JSONL");
  build->add_option("--reserve", s.reserve, "Evaluation-set JSONL to top up small subsets from");
  build->add_option("--min-count", s.min_count, "Target per-polarity count when topping up");
  build->add_option("--balance", s.balance, "Polarity balancing: short, all or none");
  build->add_option("--max-attempts", s.max_attempts, "Wrong-answer generation attempts")
      ->check(CLI::PositiveNumber);
  build->add_option("--retry-temperature", s.retry_temperature,
                    "Temperature for wrong-answer retries");

  auto* run = app.add_subcommand("run", "Run the evaluation set");
  run->add_option("--evalset", s.evalset, "Evaluation-set JSONL");
  run->add_option("--records", s.records, "Output run-record JSONL");
  run->add_option("--formats", s.formats, "mcqa, ynqa, ynmcqa (default all)")->delimiter(',');
  run->add_option("--scenarios", s.scenarios, "Scenario ids (default all eight)")->delimiter(',');

  auto* score = app.add_subcommand("score", "Score run records");
  score->add_option("--evalset", s.evalset, "Evaluation-set JSONL");
  score->add_option("--records", s.records, "Run-record JSONL");

  auto* shift = app.add_subcommand("shift", "Prediction shift towards the IDK option");
  shift->add_option("--evalset", s.evalset, "Evaluation-set JSONL");
  shift->add_option("--records", s.records, "Run records holding both runs");
  shift->add_option("--base", s.base, "Run records without the IDK option");
  shift->add_option("--idk", s.idk, "Run records with the IDK option");

  auto* nas_cmd = app.add_subcommand("nas", "NAS grid for one attention dump");
  nas_cmd->add_option("--dump", s.dump, "NASDUMP1 file")->required();
  nas_cmd->add_option("--eps", s.eps, "Clamp before the logarithm")->check(CLI::PositiveNumber);
  nas_cmd->add_option("--i-start", s.i_start, "First summed position (default N_I)");
  nas_cmd->add_option("--i-end", s.i_end, "One past the last summed position (default M)");
  nas_cmd->add_option("--out", s.grid_out, "Output grid CSV");

  auto* report = app.add_subcommand("report", "Markdown report and plot data");
  report->add_option("--evalset", s.evalset, "Evaluation-set JSONL");
  report->add_option("--records", s.records, "Run-record JSONL");
  report->add_option("--base", s.base, "Run records without the IDK option");
  report->add_option("--idk", s.idk, "Run records with the IDK option");
  report->add_option("--nas-grid", s.nas_grids, "label=grid.csv (repeatable)");

  std::vector<std::string> argv_storage{"negbias"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    setup_logging(s.log_level);
    if (*probe) return cmd_probe(s);
    if (*categorize) return cmd_categorize(s);
    if (*build) return cmd_build(s);
    if (*run) return cmd_run(s);
    if (*score) return cmd_score(s);
    if (*shift) return cmd_shift(s);
    if (*nas_cmd) return cmd_nas(s);
    if (*report) return cmd_report(s);
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const IntegrityError& e) {
    spdlog::error("{}", e.what());
    return kExitIntegrity;
  } catch (const ProviderError& e) {
    spdlog::error("{}", e.what());
    return kExitProvider;
  } catch (const CacheIoError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace negbias
