#pragma once

#include <cstdint>
#include <span>

namespace oblsamp {

struct ChiSquare {
  double statistic = 0;
  std::uint64_t dof = 0;
  double p_value = 1.0;
};

// Upper-tail p-value of the chi-square distribution.
double chi_square_p(double statistic, double dof);

// Pearson chi-square of observed counts against a uniform expectation.
ChiSquare chisq_uniform(std::span<const std::uint64_t> counts);

// Pearson chi-square against explicit expected counts (same length).
ChiSquare chisq_expected(std::span<const std::uint64_t> counts,
                         std::span<const double> expected);

}  // namespace oblsamp
