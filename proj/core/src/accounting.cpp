#include "oblsamp/accounting.hpp"

#include <cmath>

#include "oblsamp/errors.hpp"

namespace oblsamp {

double gaussian_sigma(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw ConfigError("gaussian_sigma requires epsilon, delta in (0,1)");
  }
  return std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

double amplify_poisson(double epsilon, double gamma) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("amplification requires epsilon > 0");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError("amplification requires gamma in (0,1]");
  }
  // log1p keeps precision when gamma * expm1(epsilon) is tiny.
  return std::log1p(gamma * std::expm1(epsilon));
}

double amplify_swo(double epsilon, std::uint64_t m, std::uint64_t n) {
  if (n == 0 || m == 0 || m > n) {
    throw ConfigError("amplify_swo requires 1 <= m <= n");
  }
  return amplify_poisson(epsilon, static_cast<double>(m) / static_cast<double>(n));
}

PrivacyBudget strong_composition(double epsilon, double delta, std::uint64_t T,
                                 double delta2) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("strong_composition requires epsilon >= 0");
  }
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw ConfigError("strong_composition requires delta in [0,1)");
  }
  if (T < 1) {
    throw ConfigError("strong_composition requires T >= 1");
  }
  if (!(delta2 > 0.0)) {
    throw ConfigError("strong_composition requires delta'' > 0");
  }
  const double t = static_cast<double>(T);
  PrivacyBudget out;
  out.epsilon = epsilon * std::sqrt(2.0 * t * std::log(1.0 / delta2)) +
                t * epsilon * std::expm1(epsilon);
  out.delta = t * delta + delta2;
  return out;
}

double parallel_composition(std::span<const double> epsilons) {
  if (epsilons.empty()) {
    throw ConfigError("parallel_composition requires a non-empty list");
  }
  double best = epsilons[0];
  for (double e : epsilons) {
    best = std::max(best, e);
  }
  return best;
}

EpochBudget epoch_budget(const SamplingSpec& spec, double epsilon, double delta) {
  if (spec.T < 1 || spec.E < 1) {
    throw ConfigError("epoch_budget requires T >= 1 and E >= 1");
  }
  EpochBudget out;
  switch (spec.kind) {
    case SamplingKind::Shuffle: {
      if (spec.n == 0 || spec.m == 0 || spec.m > spec.n) {
        throw ConfigError("shuffle spec requires 1 <= m <= n");
      }
      if (spec.T > spec.n / spec.m) {
        throw ConfigError("shuffle epoch admits at most n/m disjoint samples");
      }
      out.amplified_epsilon = epsilon;  // no subsampling gain; disjointness instead
      if (spec.E == 1) {
        out.total = {epsilon, delta};
      } else {
        out.total = strong_composition(epsilon, delta, spec.E, spec.delta2);
      }
      return out;
    }
    case SamplingKind::Swo:
    case SamplingKind::Poisson: {
      double gamma = spec.gamma;
      if (spec.m != 0 && spec.n != 0) {
        const double from_mn = static_cast<double>(spec.m) / static_cast<double>(spec.n);
        if (gamma != 0.0 && std::abs(gamma - from_mn) > 1e-12) {
          throw ConfigError("gamma and m/n disagree");
        }
        gamma = from_mn;
      }
      if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw ConfigError("sampling spec requires gamma in (0,1]");
      }
      out.amplified_epsilon = amplify_poisson(epsilon, gamma);
      out.total = strong_composition(out.amplified_epsilon, gamma * delta,
                                     spec.T * spec.E, spec.delta2);
      return out;
    }
  }
  throw ConfigError("unknown sampling kind");
}

}  // namespace oblsamp
