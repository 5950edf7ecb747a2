#pragma once

#include <cstdint>
#include <vector>

#include "oblsamp/bytes.hpp"
#include "oblsamp/prp.hpp"

namespace oblsamp {

// Query interface over the secretly drawn abstract samples. Sample ids i and
// keys j are 1-based. Implementations must be pure functions of their seed so
// queries are safe from many threads.
class TemplateView {
 public:
  virtual ~TemplateView() = default;
  virtual std::uint64_t n() const = 0;
  virtual std::uint64_t k() const = 0;
  virtual bool contains(std::uint64_t i, std::uint64_t j) const = 0;
};

class SwoTemplateView : public TemplateView {
 public:
  virtual std::uint64_t sample_size(std::uint64_t i) const = 0;
};

class PoissonTemplateView : public TemplateView {
 public:
  virtual std::uint64_t sample_size(std::uint64_t i) const = 0;
  // Position of member key l within sample i; the positions of the size(i)
  // members are exactly 1..size(i). Hard error if l is not a member.
  virtual std::uint64_t position(std::uint64_t i, std::uint64_t l) const = 0;
};

// k = n/m samples without replacement: key j is in sample i iff rho_i(j) <= m.
// Supports per-sample sizes m_1..m_k (sum = n) for the variable-size mode.
class SwoTemplate final : public SwoTemplateView {
 public:
  SwoTemplate(std::uint64_t n, std::uint64_t m, const Seed& seed);
  SwoTemplate(std::uint64_t n, std::vector<std::uint64_t> sizes, const Seed& seed);

  std::uint64_t n() const override { return n_; }
  std::uint64_t k() const override { return static_cast<std::uint64_t>(prps_.size()); }
  std::uint64_t sample_size(std::uint64_t i) const override;
  bool contains(std::uint64_t i, std::uint64_t j) const override;

 private:
  void init_prps(const Seed& seed);

  std::uint64_t n_;
  std::vector<std::uint64_t> sizes_;
  std::vector<Prp> prps_;
};

// k Poisson samples with parameter gamma: sizes M_i ~ Binom(n, gamma) fixed at
// initialization, key j in sample i iff rho_i(j) <= M_i.
class PoissonTemplate final : public PoissonTemplateView {
 public:
  PoissonTemplate(std::uint64_t n, double gamma, std::uint64_t k, const Seed& seed);

  std::uint64_t n() const override { return n_; }
  std::uint64_t k() const override { return static_cast<std::uint64_t>(prps_.size()); }
  double gamma() const { return gamma_; }

  bool contains(std::uint64_t i, std::uint64_t j) const override;
  std::uint64_t sample_size(std::uint64_t i) const override;
  std::uint64_t position(std::uint64_t i, std::uint64_t l) const override;

 private:
  std::uint64_t n_;
  double gamma_;
  std::vector<Prp> prps_;
  std::vector<std::uint64_t> sizes_;
};

// r_j = number of samples among 1..k_prime that contain key j (1-based j in
// the returned vector's index j-1).
std::vector<std::uint64_t> replication_counts(const TemplateView& t, std::uint64_t k_prime);

}  // namespace oblsamp
