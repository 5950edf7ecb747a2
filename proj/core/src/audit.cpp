#include "oblsamp/audit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "oblsamp/dataset.hpp"
#include "oblsamp/errors.hpp"
#include "oblsamp/stats.hpp"

namespace oblsamp {

bool AuditReport::exact_failure() const {
  if (!trace_equal) return true;
  for (const TestResult& t : tests) {
    if (!t.pass && !t.statistical) return true;
  }
  return false;
}

bool AuditReport::statistical_failure() const {
  for (const TestResult& t : tests) {
    if (!t.pass && t.statistical) return true;
  }
  return false;
}

int AuditReport::exit_code() const {
  if (exact_failure()) return 1;
  if (statistical_failure()) return 2;
  return 0;
}

std::string AuditReport::to_json() const {
  nlohmann::json j;
  j["runs"] = runs;
  j["trace_equal"] = trace_equal;
  if (first_divergence) {
    j["first_divergence"] = {{"index", first_divergence->index},
                             {"a", first_divergence->a},
                             {"b", first_divergence->b}};
  } else {
    j["first_divergence"] = nullptr;
  }
  j["tests"] = nlohmann::json::array();
  for (const TestResult& t : tests) {
    nlohmann::json jt;
    jt["name"] = t.name;
    jt["statistic"] = t.statistic;
    if (t.p) {
      jt["p"] = *t.p;
    } else {
      jt["p"] = nullptr;
    }
    jt["pass"] = t.pass;
    j["tests"].push_back(std::move(jt));
  }
  j["access_counts"] = nlohmann::json::object();
  for (const auto& [region, count] : access_counts) {
    j["access_counts"][region] = count;
  }
  return j.dump(2);
}

std::string AuditReport::to_text() const {
  std::ostringstream os;
  os << "runs: " << runs << "\n";
  os << "trace_equal: " << (trace_equal ? "true" : "false") << "\n";
  if (first_divergence) {
    os << "first_divergence: record " << first_divergence->index << "\n  run A: "
       << first_divergence->a << "\n  run B: " << first_divergence->b << "\n";
  }
  for (const TestResult& t : tests) {
    os << (t.pass ? "[pass] " : "[FAIL] ") << t.name << "  statistic=" << t.statistic;
    if (t.p) os << "  p=" << *t.p;
    os << "\n";
  }
  os << "access_counts:";
  for (const auto& [region, count] : access_counts) {
    os << " " << region << "=" << count;
  }
  os << "\n";
  return os.str();
}

ShuffleConfig RunConfig::shuffle_config() const {
  ShuffleConfig scfg;
  scfg.n = n;
  scfg.c = c;
  scfg.private_capacity = private_capacity;
  scfg.padding = padding;
  return scfg;
}

void RunConfig::validate() const {
  if (algorithm != "swo" && algorithm != "poisson" && algorithm != "shuffle") {
    throw ConfigError("algorithm must be swo, poisson or shuffle");
  }
  if (n == 0) throw ConfigError("n must be positive");
  if (runs == 0) throw ConfigError("run count must be positive");
  if (algorithm == "swo" && (m == 0 || n % m != 0)) {
    throw ConfigError("swo requires m >= 1 dividing n");
  }
  if (algorithm == "poisson") {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("poisson requires gamma in (0,1)");
    if (k == 0) throw ConfigError("poisson requires k >= 1");
  }
  shuffle_config().validate();
}

std::optional<Divergence> first_trace_divergence(std::span<const std::string> traces) {
  if (traces.size() < 2) return std::nullopt;
  const std::string& base = traces[0];
  for (std::size_t r = 1; r < traces.size(); ++r) {
    if (traces[r] == base) continue;
    // locate the first differing line
    std::istringstream sa(base), sb(traces[r]);
    std::string la, lb;
    std::size_t index = 0;
    while (true) {
      bool ga = static_cast<bool>(std::getline(sa, la));
      bool gb = static_cast<bool>(std::getline(sb, lb));
      if (!ga && !gb) break;
      if (!ga || !gb || la != lb) {
        return Divergence{index, ga ? la : "<missing>", gb ? lb : "<missing>"};
      }
      ++index;
    }
  }
  return std::nullopt;
}

namespace {

struct ExecOptions {
  bool audited_text = false;
  bool open_samples = false;
  bool transcript = false;
};

struct ExecutedRun {
  std::string retries;          // per-shuffle retry descriptors, "/"-joined
  bool retried = false;
  std::string audited_text;     // canonical text of the audited phase range
  std::uint64_t audited_records = 0;
  std::uint64_t scan_records = 0;     // 0 for plain shuffle
  std::uint64_t shuffle1_records = 0;
  std::uint64_t total_records = 0;    // everything but ingest
  std::vector<std::uint64_t> revealed;
  std::vector<std::uint64_t> segment_sizes;                // swo
  std::vector<std::vector<std::uint64_t>> opened_keys;     // per sample, sorted
  std::optional<PoissonPrivateMeta> meta;                  // poisson
  std::optional<RunTranscript> transcript;
  std::map<std::string, std::uint64_t> access_counts;
};

ExecutedRun execute_run(const RunConfig& cfg, std::uint64_t run_index, const ExecOptions& eo) {
  const Seed data_seed = derive_seed(
      cfg.master, "audit.data",
      cfg.policy == SeedPolicy::FixedDataVariedSecret ? 0 : run_index);
  const Seed secret = derive_seed(cfg.master, "audit.secret", run_index);
  const SecretKey key = SecretKey::derive(secret, "enc");
  const RunSeeds rs = RunSeeds::derive(secret);
  const ShuffleConfig scfg = cfg.shuffle_config();

  ExternalMemory mem;
  Dataset data = make_dataset(cfg.n, cfg.record_size, data_seed);
  RegionId dataset = ingest_dataset(mem, data, key);

  SamplesOptions opts;
  opts.want_transcript = eo.transcript;
  if (cfg.inject_broken_scan_in_run && *cfg.inject_broken_scan_in_run == run_index) {
    opts.scan.terminal_dummy_read = false;
  }

  ExecutedRun out;
  SeededRng shuffle_rng(rs.shuffle);
  std::size_t audited_begin = 0, audited_end = 0;

  if (cfg.algorithm == "swo") {
    SwoTemplate t(cfg.n, cfg.m, rs.tmpl);
    SecretPermutation pi1(rs.pi1, cfg.n), pi2(rs.pi2, cfg.n);
    SwoRun run = samples_swo(mem, dataset, t, pi1, pi2, scfg, key, shuffle_rng, opts);
    out.retries = run.shuffle1.retries + "/" + run.shuffle2.retries;
    out.retried = run.shuffle1.attempts > 1 || run.shuffle2.attempts > 1;
    out.revealed = run.revealed_ids;
    out.segment_sizes = run.segment_sizes;
    out.transcript = run.transcript;
    audited_begin = mem.phase("shuffle1")->begin;
    audited_end = mem.phase("shuffle2")->end;
    if (eo.open_samples) {
      for (const auto& sample : open_swo_samples(mem, run.output, run.segment_sizes, key)) {
        std::vector<std::uint64_t> keys;
        for (const Record& r : sample) keys.push_back(r.key);
        std::sort(keys.begin(), keys.end());
        out.opened_keys.push_back(std::move(keys));
      }
    }
  } else if (cfg.algorithm == "poisson") {
    PoissonTemplate t(cfg.n, cfg.gamma, cfg.k, rs.tmpl);
    SecretPermutation pi1(rs.pi1, cfg.n), pi2(rs.pi2, cfg.n);
    PoissonRun run = samples_poisson(mem, dataset, t, pi1, pi2, scfg, key, shuffle_rng, opts);
    out.retries = run.shuffle1.retries + "/" + run.shuffle2.retries;
    out.retried = run.shuffle1.attempts > 1 || run.shuffle2.attempts > 1;
    out.revealed = run.revealed_positions;
    out.meta = run.meta;
    out.transcript = run.transcript;
    audited_begin = mem.phase("shuffle1")->begin;
    audited_end = mem.phase("shuffle2")->end;
    if (eo.open_samples) {
      for (const auto& sample : open_poisson_samples(mem, run.output, run.meta, key)) {
        std::vector<std::uint64_t> keys;
        for (const Record& r : sample) keys.push_back(r.key);
        std::sort(keys.begin(), keys.end());
        out.opened_keys.push_back(std::move(keys));
      }
    }
  } else {
    PrivateMemory pm(scfg.capacity());
    SecretPermutation pi(rs.pi1, cfg.n);
    mem.begin_phase("shuffle1");
    ShuffleOutcome o = oblivious_shuffle(mem, dataset, pi, scfg, key, shuffle_rng, pm);
    mem.end_phase();
    out.retries = o.retries;
    out.retried = o.attempts > 1;
    audited_begin = mem.phase("shuffle1")->begin;
    audited_end = mem.phase("shuffle1")->end;
  }

  out.audited_records = audited_end - audited_begin;
  if (auto scan = mem.phase("scan")) {
    out.scan_records = scan->end - scan->begin;
  }
  out.shuffle1_records = mem.phase("shuffle1")->end - mem.phase("shuffle1")->begin;
  out.total_records = mem.trace().size() - mem.phase("ingest")->end;
  if (eo.audited_text) {
    out.audited_text = mem.trace().to_text(audited_begin, audited_end);
  }
  out.access_counts = mem.access_counts();
  if (!cfg.trace_file.empty() && run_index == 0) {
    write_trace_file(mem.trace(), cfg.trace_file);
  }
  return out;
}

// Chi-square of values in [0, domain) against uniformity, binned; expected
// counts follow the exact bin widths so domain need not divide evenly.
ChiSquare binned_uniform_chisq(std::span<const std::uint64_t> values, std::uint64_t domain,
                               std::uint64_t bins) {
  std::vector<std::uint64_t> counts(bins, 0);
  for (std::uint64_t v : values) {
    ++counts[v * bins / domain];
  }
  std::vector<double> expected(bins, 0.0);
  const double per_value = static_cast<double>(values.size()) / static_cast<double>(domain);
  for (std::uint64_t v = 0; v < domain; ++v) {
    expected[v * bins / domain] += per_value;
  }
  return chisq_expected(counts, expected);
}

std::vector<std::vector<std::uint64_t>> enumerate_subsets(std::uint64_t n, std::uint64_t m) {
  std::vector<std::vector<std::uint64_t>> all;
  std::vector<std::uint64_t> cur;
  // lexicographic m-subsets of [1, n]
  std::function<void(std::uint64_t)> rec = [&](std::uint64_t start) {
    if (cur.size() == m) {
      all.push_back(cur);
      return;
    }
    for (std::uint64_t v = start; v <= n; ++v) {
      cur.push_back(v);
      rec(v + 1);
      cur.pop_back();
    }
  };
  rec(1);
  return all;
}

constexpr double kSignificance = 0.001;

}  // namespace

AuditReport audit_trace_invariance(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.runs < 2) {
    throw ConfigError("trace audit needs at least two runs");
  }
  ExecOptions eo;
  eo.audited_text = true;

  AuditReport report;
  report.runs = cfg.runs;

  std::map<std::string, std::vector<std::string>> groups;  // retry descriptor -> texts
  std::uint64_t retried_runs = 0;
  std::uint64_t scan_shape_violations = 0;
  bool scan_expected = cfg.algorithm != "shuffle";
  for (std::uint64_t r = 0; r < cfg.runs; ++r) {
    ExecutedRun run = execute_run(cfg, r, eo);
    if (r == 0) report.access_counts = run.access_counts;
    if (run.retried) ++retried_runs;
    if (scan_expected && run.scan_records != 2 * cfg.n + 2) ++scan_shape_violations;
    groups[run.retries].push_back(std::move(run.audited_text));
  }

  for (auto& [retries, texts] : groups) {
    if (auto d = first_trace_divergence(texts)) {
      report.trace_equal = false;
      if (!report.first_divergence) report.first_divergence = d;
    }
  }

  const double retry_rate =
      static_cast<double>(retried_runs) / static_cast<double>(cfg.runs);
  report.tests.push_back(
      {"retry_rate", retry_rate, std::nullopt, retry_rate < 0.01, true});
  report.tests.push_back({"retry_groups", static_cast<double>(groups.size()), std::nullopt,
                          true, false});
  if (scan_expected) {
    report.tests.push_back({"scan_shape_2n_plus_2",
                            static_cast<double>(scan_shape_violations), std::nullopt,
                            scan_shape_violations == 0, false});
  }
  return report;
}

AuditReport audit_revealed_values(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.algorithm == "shuffle") {
    throw ConfigError("revealed-value audit applies to swo or poisson");
  }
  if (cfg.runs < 1000) {
    throw ConfigError("revealed-value audit needs at least 1000 runs for power");
  }

  AuditReport report;
  report.runs = cfg.runs;

  std::uint64_t exact_violations = 0;
  if (cfg.algorithm == "swo") {
    const std::uint64_t k = cfg.n / cfg.m;
    std::vector<std::uint64_t> id1_positions;  // flat: every position of id 1, all runs
    for (std::uint64_t r = 0; r < cfg.runs; ++r) {
      ExecutedRun run = execute_run(cfg, r, {});
      if (r == 0) report.access_counts = run.access_counts;
      std::vector<std::uint64_t> counts(k, 0);
      for (std::size_t p = 0; p < run.revealed.size(); ++p) {
        std::uint64_t id = run.revealed[p];
        ++counts[id - 1];
        if (id == 1) id1_positions.push_back(p);
      }
      for (std::uint64_t i = 0; i < k; ++i) {
        if (counts[i] != run.segment_sizes[i]) ++exact_violations;
      }
    }
    report.tests.push_back({"id_multiplicity_exact", static_cast<double>(exact_violations),
                            std::nullopt, exact_violations == 0, false});
    ChiSquare cs =
        binned_uniform_chisq(id1_positions, cfg.n, std::min<std::uint64_t>(cfg.n, 64));
    report.tests.push_back({"id1_position_uniformity", cs.statistic, cs.p_value,
                            cs.p_value > kSignificance, true});
  } else {
    std::vector<std::uint64_t> value1_slots;
    for (std::uint64_t r = 0; r < cfg.runs; ++r) {
      ExecutedRun run = execute_run(cfg, r, {});
      if (r == 0) report.access_counts = run.access_counts;
      std::vector<std::uint64_t> sorted = run.revealed;
      std::sort(sorted.begin(), sorted.end());
      for (std::uint64_t p = 0; p < sorted.size(); ++p) {
        if (sorted[p] != p + 1) {
          ++exact_violations;
          break;
        }
      }
      for (std::size_t p = 0; p < run.revealed.size(); ++p) {
        if (run.revealed[p] == 1) value1_slots.push_back(p);
      }
    }
    report.tests.push_back({"positions_exact_permutation",
                            static_cast<double>(exact_violations), std::nullopt,
                            exact_violations == 0, false});
    std::uint64_t bins = std::min<std::uint64_t>(cfg.n, std::max<std::uint64_t>(2, cfg.runs / 100));
    ChiSquare cs = binned_uniform_chisq(value1_slots, cfg.n, bins);
    report.tests.push_back({"position1_slot_uniformity", cs.statistic, cs.p_value,
                            cs.p_value > kSignificance, true});
  }
  return report;
}

AuditReport audit_distribution(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.n > 20) {
    throw ConfigError("distribution audit is limited to n <= 20");
  }
  ExecOptions eo;
  eo.open_samples = true;

  AuditReport report;
  report.runs = cfg.runs;

  if (cfg.algorithm == "swo") {
    const std::uint64_t k = cfg.n / cfg.m;
    std::vector<std::vector<std::uint64_t>> membership(
        k, std::vector<std::uint64_t>(cfg.n, 0));  // [sample][key-1]
    auto subsets = enumerate_subsets(cfg.n, cfg.m);
    const bool track_subsets = subsets.size() <= 128;
    std::map<std::vector<std::uint64_t>, std::size_t> subset_index;
    for (std::size_t s = 0; s < subsets.size(); ++s) subset_index[subsets[s]] = s;
    std::vector<std::uint64_t> subset_counts(subsets.size(), 0);
    std::uint64_t full_set_violations = 0;

    for (std::uint64_t r = 0; r < cfg.runs; ++r) {
      ExecutedRun run = execute_run(cfg, r, eo);
      if (r == 0) report.access_counts = run.access_counts;
      for (std::uint64_t i = 0; i < k; ++i) {
        for (std::uint64_t key : run.opened_keys[i]) {
          ++membership[i][key - 1];
        }
      }
      if (track_subsets) {
        ++subset_counts[subset_index.at(run.opened_keys[0])];
      }
      if (k == 1) {
        for (std::uint64_t j = 0; j < cfg.n; ++j) {
          if (run.opened_keys[0][j] != j + 1) ++full_set_violations;
        }
      }
    }
    for (std::uint64_t i = 0; i < k; ++i) {
      ChiSquare cs = chisq_uniform(membership[i]);
      report.tests.push_back({"membership_uniformity_sample_" + std::to_string(i + 1),
                              cs.statistic, cs.p_value, cs.p_value > kSignificance, true});
    }
    if (track_subsets && k > 1) {
      ChiSquare cs = chisq_uniform(subset_counts);
      report.tests.push_back({"subset_uniformity_sample_1", cs.statistic, cs.p_value,
                              cs.p_value > kSignificance, true});
    }
    if (k == 1) {
      report.tests.push_back({"single_sample_is_full_key_set",
                              static_cast<double>(full_set_violations), std::nullopt,
                              full_set_violations == 0, false});
    }
  } else if (cfg.algorithm == "poisson") {
    std::vector<std::uint64_t> member_counts(cfg.n, 0);
    std::uint64_t runs_with_sample1 = 0;
    for (std::uint64_t r = 0; r < cfg.runs; ++r) {
      ExecutedRun run = execute_run(cfg, r, eo);
      if (r == 0) report.access_counts = run.access_counts;
      if (run.opened_keys.empty()) continue;
      ++runs_with_sample1;
      for (std::uint64_t key : run.opened_keys[0]) {
        ++member_counts[key - 1];
      }
    }
    if (runs_with_sample1 == 0) {
      throw ConfigError("no run produced a first sample; gamma too large for n");
    }
    const double se = std::sqrt(cfg.gamma * (1 - cfg.gamma) /
                                static_cast<double>(runs_with_sample1));
    double max_z = 0;
    for (std::uint64_t j = 0; j < cfg.n; ++j) {
      const double freq = static_cast<double>(member_counts[j]) /
                          static_cast<double>(runs_with_sample1);
      max_z = std::max(max_z, std::abs(freq - cfg.gamma) / se);
    }
    report.tests.push_back(
        {"membership_marginal_max_z", max_z, std::nullopt, max_z <= 4.0, true});
  } else {
    throw ConfigError("distribution audit applies to swo or poisson");
  }
  return report;
}

AuditReport audit_cost(const RunConfig& cfg, std::span<const std::uint64_t> n_list) {
  if (n_list.empty()) {
    throw ConfigError("cost audit needs at least one size");
  }
  AuditReport report;
  report.runs = n_list.size();

  std::vector<double> ratios;
  for (std::uint64_t n : n_list) {
    RunConfig rcfg = cfg;
    rcfg.n = n;
    rcfg.runs = 1;
    rcfg.validate();
    // Retries change trace length; normalize by taking the first retry-free
    // run (retry probability at default padding makes this the common case).
    std::optional<ExecutedRun> chosen;
    for (std::uint64_t attempt = 0; attempt < 8 && !chosen; ++attempt) {
      ExecutedRun run = execute_run(rcfg, attempt, {});
      if (!run.retried) chosen = std::move(run);
    }
    const std::string suffix = "_n" + std::to_string(n);
    if (!chosen) {
      report.tests.push_back({"retry_free_run" + suffix, 8, std::nullopt, false, false});
      continue;
    }
    report.access_counts = chosen->access_counts;
    const double ratio =
        static_cast<double>(chosen->total_records) / static_cast<double>(n);
    ratios.push_back(ratio);
    report.tests.push_back({"trace_ratio" + suffix, ratio, std::nullopt, true, false});
    const std::uint64_t predicted = access_cost(n, rcfg.shuffle_config());
    report.tests.push_back({"shuffle_cost_exact" + suffix,
                            static_cast<double>(chosen->shuffle1_records),
                            std::nullopt, chosen->shuffle1_records == predicted, false});
    if (cfg.algorithm != "shuffle") {
      report.tests.push_back({"scan_length_exact" + suffix,
                              static_cast<double>(chosen->scan_records), std::nullopt,
                              chosen->scan_records == 2 * n + 2, false});
    }
  }
  if (!ratios.empty()) {
    const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
    const double spread = *mx / *mn;
    report.tests.push_back({"ratio_stability", spread, std::nullopt, spread <= 1.15, false});
  } else {
    report.tests.push_back({"ratio_stability", 0, std::nullopt, false, false});
  }
  return report;
}

}  // namespace oblsamp
