#include "oblsamp/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include "oblsamp/errors.hpp"

namespace oblsamp {

double chi_square_p(double statistic, double dof) {
  if (!(dof > 0)) {
    throw ConfigError("chi-square requires positive degrees of freedom");
  }
  if (statistic <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

ChiSquare chisq_uniform(std::span<const std::uint64_t> counts) {
  if (counts.size() < 2) {
    throw ConfigError("chi-square needs at least two cells");
  }
  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;
  const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  if (expected <= 0) {
    throw ConfigError("chi-square with empty counts");
  }
  ChiSquare out;
  for (std::uint64_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    out.statistic += d * d / expected;
  }
  out.dof = counts.size() - 1;
  out.p_value = chi_square_p(out.statistic, static_cast<double>(out.dof));
  return out;
}

ChiSquare chisq_expected(std::span<const std::uint64_t> counts,
                         std::span<const double> expected) {
  if (counts.size() != expected.size() || counts.size() < 2) {
    throw ConfigError("chi-square cell mismatch");
  }
  ChiSquare out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!(expected[i] > 0)) {
      throw ConfigError("chi-square expected counts must be positive");
    }
    const double d = static_cast<double>(counts[i]) - expected[i];
    out.statistic += d * d / expected[i];
  }
  out.dof = counts.size() - 1;
  out.p_value = chi_square_p(out.statistic, static_cast<double>(out.dof));
  return out;
}

}  // namespace oblsamp
