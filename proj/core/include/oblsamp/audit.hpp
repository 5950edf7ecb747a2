#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oblsamp/bytes.hpp"
#include "oblsamp/sampling.hpp"

namespace oblsamp {

struct TestResult {
  std::string name;
  double statistic = 0;
  std::optional<double> p;  // set for statistical tests only
  bool pass = true;
  bool statistical = false;
};

struct Divergence {
  std::size_t index = 0;  // record index within the audited trace slice
  std::string a, b;
};

struct AuditReport {
  std::uint64_t runs = 0;
  bool trace_equal = true;
  std::optional<Divergence> first_divergence;
  std::vector<TestResult> tests;
  std::map<std::string, std::uint64_t> access_counts;

  bool exact_failure() const;
  bool statistical_failure() const;
  // 0 = all pass, 1 = exact-property failure, 2 = statistical failure.
  int exit_code() const;
  std::string to_json() const;
  std::string to_text() const;
};

enum class SeedPolicy { FixedDataVariedSecret, VariedDataVariedSecret };

struct RunConfig {
  std::string algorithm = "swo";  // swo | poisson | shuffle
  std::uint64_t n = 0;
  std::uint64_t m = 0;     // swo sample size
  double gamma = 0;        // poisson rate
  std::uint64_t k = 0;     // poisson sample count
  unsigned c = 2;
  double padding = 2.0;
  std::size_t private_capacity = 0;  // 0 = shuffle default
  std::uint64_t runs = 2;
  std::uint32_t record_size = 16;
  Seed master{};
  SeedPolicy policy = SeedPolicy::VariedDataVariedSecret;
  std::string trace_file;  // when set, the first run's full trace is written here
  // Auditor sensitivity hook: execute this run with the scan's terminal dummy
  // read disabled, which a correct audit must flag.
  std::optional<std::uint64_t> inject_broken_scan_in_run;

  ShuffleConfig shuffle_config() const;
  void validate() const;
};

// Byte-level comparison of canonical trace texts; nullopt when all equal.
std::optional<Divergence> first_trace_divergence(std::span<const std::string> traces);

// Runs the algorithm repeatedly under fresh secrets, groups runs by retry
// outcome and asserts byte-identical traces within groups over the shuffle and
// scan phases (grouping/ordering phases are excluded; their revealed values
// are the subject of audit_revealed_values).
AuditReport audit_trace_invariance(const RunConfig& cfg);

// Exact multiplicity / permutation checks on revealed values, plus chi-square
// uniformity of their placement across runs.
AuditReport audit_revealed_values(const RunConfig& cfg);

// Opens samples with the secret key (small n only) and tests membership
// marginals and subset frequencies against the sampling distribution.
AuditReport audit_distribution(const RunConfig& cfg);

// Measures trace length across sizes and checks the linear-cost contract.
AuditReport audit_cost(const RunConfig& cfg, std::span<const std::uint64_t> n_list);

}  // namespace oblsamp
