#pragma once

#include <cstdint>
#include <span>

namespace oblsamp {

struct PrivacyBudget {
  double epsilon = 0;
  double delta = 0;
};

// sigma = sqrt(2 ln(1.25/delta)) / epsilon, valid for epsilon, delta in (0,1).
double gaussian_sigma(double epsilon, double delta);

// epsilon' = ln(1 + gamma (e^epsilon - 1)), gamma in (0,1]. The companion
// delta scales as gamma * delta; epoch_budget applies that pairing.
double amplify_poisson(double epsilon, double gamma);

// Same closed form with gamma = m/n.
double amplify_swo(double epsilon, std::uint64_t m, std::uint64_t n);

// T adaptive invocations of an (eps, delta)-DP mechanism:
// (eps sqrt(2T ln(1/delta2)) + T eps (e^eps - 1), T delta + delta2).
PrivacyBudget strong_composition(double epsilon, double delta, std::uint64_t T,
                                 double delta2);

// Mechanisms on disjoint samples compose to the maximum epsilon.
double parallel_composition(std::span<const double> epsilons);

enum class SamplingKind { Shuffle, Swo, Poisson };

struct SamplingSpec {
  SamplingKind kind = SamplingKind::Shuffle;
  double gamma = 0;        // Poisson rate; 0 means "derive from m/n"
  std::uint64_t m = 0;     // sample size (shuffle / swo)
  std::uint64_t n = 0;     // dataset size
  std::uint64_t T = 1;     // mechanism invocations per epoch
  std::uint64_t E = 1;     // epochs
  double delta2 = 0;       // composition slack delta''
};

struct EpochBudget {
  PrivacyBudget total;
  double amplified_epsilon = 0;  // per-step epsilon after subsampling (sampling rows)
};

// Epoch-level combination:
//   shuffle, E=1:  (eps, delta) by parallel composition over disjoint batches;
//   shuffle, E>1:  strong composition of the epoch budget over E;
//   poisson/swo:   strong composition of (amplified eps, gamma*delta) over T*E.
EpochBudget epoch_budget(const SamplingSpec& spec, double epsilon, double delta);

}  // namespace oblsamp
