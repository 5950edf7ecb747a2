#include "oblsamp/sample_template.hpp"

#include <numeric>
#include <stdexcept>

#include "oblsamp/errors.hpp"
#include "oblsamp/rng.hpp"

namespace oblsamp {

namespace {

void check_sample_id(std::uint64_t i, std::uint64_t k) {
  if (i < 1 || i > k) {
    throw ConfigError("sample id out of range [1,k]");
  }
}

void check_key(std::uint64_t j, std::uint64_t n) {
  if (j < 1 || j > n) {
    throw ConfigError("key out of range [1,n]");
  }
}

}  // namespace

SwoTemplate::SwoTemplate(std::uint64_t n, std::uint64_t m, const Seed& seed) : n_(n) {
  if (n == 0 || m == 0 || m > n) {
    throw ConfigError("swo template requires 1 <= m <= n");
  }
  if (n % m != 0) {
    throw ConfigError("swo template requires m to divide n");
  }
  sizes_.assign(n / m, m);
  init_prps(seed);
}

SwoTemplate::SwoTemplate(std::uint64_t n, std::vector<std::uint64_t> sizes, const Seed& seed)
    : n_(n), sizes_(std::move(sizes)) {
  if (n == 0 || sizes_.empty()) {
    throw ConfigError("swo template requires n >= 1 and at least one sample");
  }
  std::uint64_t total = 0;
  for (std::uint64_t m : sizes_) {
    if (m == 0 || m > n) {
      throw ConfigError("swo sample sizes must lie in [1,n]");
    }
    total += m;
  }
  if (total != n) {
    throw ConfigError("swo sample sizes must sum to n");
  }
  init_prps(seed);
}

void SwoTemplate::init_prps(const Seed& seed) {
  prps_.reserve(sizes_.size());
  for (std::uint64_t i = 1; i <= sizes_.size(); ++i) {
    prps_.emplace_back(derive_seed(seed, "swo.prp", i), n_);
  }
}

std::uint64_t SwoTemplate::sample_size(std::uint64_t i) const {
  check_sample_id(i, k());
  return sizes_[i - 1];
}

bool SwoTemplate::contains(std::uint64_t i, std::uint64_t j) const {
  check_sample_id(i, k());
  check_key(j, n_);
  return prps_[i - 1].evaluate(j) <= sizes_[i - 1];
}

PoissonTemplate::PoissonTemplate(std::uint64_t n, double gamma, std::uint64_t k,
                                 const Seed& seed)
    : n_(n), gamma_(gamma) {
  if (n == 0) {
    throw ConfigError("poisson template requires n >= 1");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigError("poisson template requires gamma in (0,1)");
  }
  if (k == 0) {
    throw ConfigError("poisson template requires k >= 1");
  }
  prps_.reserve(k);
  for (std::uint64_t i = 1; i <= k; ++i) {
    prps_.emplace_back(derive_seed(seed, "poisson.prp", i), n_);
  }
  SeededRng size_rng(derive_seed(seed, "poisson.sizes"));
  sizes_.reserve(k);
  for (std::uint64_t i = 0; i < k; ++i) {
    sizes_.push_back(binomial_draw(size_rng, n_, gamma_));
  }
}

bool PoissonTemplate::contains(std::uint64_t i, std::uint64_t j) const {
  check_sample_id(i, k());
  check_key(j, n_);
  return prps_[i - 1].evaluate(j) <= sizes_[i - 1];
}

std::uint64_t PoissonTemplate::sample_size(std::uint64_t i) const {
  check_sample_id(i, k());
  return sizes_[i - 1];
}

std::uint64_t PoissonTemplate::position(std::uint64_t i, std::uint64_t l) const {
  check_sample_id(i, k());
  check_key(l, n_);
  std::uint64_t p = prps_[i - 1].evaluate(l);
  if (p > sizes_[i - 1]) {
    throw std::logic_error("position queried for a key outside the sample");
  }
  return p;
}

std::vector<std::uint64_t> replication_counts(const TemplateView& t, std::uint64_t k_prime) {
  if (k_prime > t.k()) {
    throw ConfigError("k' exceeds template sample count");
  }
  std::vector<std::uint64_t> r(t.n(), 0);
  for (std::uint64_t j = 1; j <= t.n(); ++j) {
    for (std::uint64_t i = 1; i <= k_prime; ++i) {
      if (t.contains(i, j)) ++r[j - 1];
    }
  }
  return r;
}

}  // namespace oblsamp
