#pragma once

// Shared test fixtures: explicitly pinned sample templates and a non-oblivious
// reference for the sampling pipelines.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "oblsamp/dataset.hpp"
#include "oblsamp/sample_template.hpp"
#include "oblsamp/sampling.hpp"

namespace oblsamp::test {

// Template with hand-picked key sets, for worked examples.
class FixedSwoTemplate final : public SwoTemplateView {
 public:
  FixedSwoTemplate(std::uint64_t n, std::vector<std::set<std::uint64_t>> samples)
      : n_(n), samples_(std::move(samples)) {}

  std::uint64_t n() const override { return n_; }
  std::uint64_t k() const override { return samples_.size(); }
  std::uint64_t sample_size(std::uint64_t i) const override {
    return samples_.at(i - 1).size();
  }
  bool contains(std::uint64_t i, std::uint64_t j) const override {
    return samples_.at(i - 1).count(j) > 0;
  }

 private:
  std::uint64_t n_;
  std::vector<std::set<std::uint64_t>> samples_;
};

// Poisson template with explicit permutations and sizes. rho[i][j-1] is the
// 1-based permutation value rho_i(j).
class FixedPoissonTemplate final : public PoissonTemplateView {
 public:
  FixedPoissonTemplate(std::uint64_t n, std::vector<std::vector<std::uint64_t>> rho,
                       std::vector<std::uint64_t> sizes)
      : n_(n), rho_(std::move(rho)), sizes_(std::move(sizes)) {}

  std::uint64_t n() const override { return n_; }
  std::uint64_t k() const override { return rho_.size(); }
  bool contains(std::uint64_t i, std::uint64_t j) const override {
    return rho_.at(i - 1).at(j - 1) <= sizes_.at(i - 1);
  }
  std::uint64_t sample_size(std::uint64_t i) const override { return sizes_.at(i - 1); }
  std::uint64_t position(std::uint64_t i, std::uint64_t l) const override {
    return rho_.at(i - 1).at(l - 1);
  }

 private:
  std::uint64_t n_;
  std::vector<std::vector<std::uint64_t>> rho_;
  std::vector<std::uint64_t> sizes_;
};

struct TestRig {
  ExternalMemory mem;
  SecretKey key;
  RegionId dataset = 0;
  Dataset data;
};

inline TestRig make_rig(std::uint64_t n, std::uint32_t record_size, const Seed& seed) {
  TestRig rig;
  rig.key = SecretKey::derive(seed, "enc");
  rig.data = make_dataset(n, record_size, derive_seed(seed, "data"));
  rig.dataset = ingest_dataset(rig.mem, rig.data, rig.key);
  return rig;
}

// Key of the element the scan substitutes for template key l: the element at
// shuffled position 1 + sum of preceding replication counts (keys equal
// dataset positions here, so this inverts the first permutation).
inline std::uint64_t mapped_key(const std::vector<std::uint64_t>& pi1_image,
                                const std::vector<std::uint64_t>& replication,
                                std::uint64_t l) {
  std::uint64_t shifted = 0;
  for (std::uint64_t j = 0; j + 1 < l; ++j) shifted += replication[j];
  SecretPermutation pi = SecretPermutation::from_image(pi1_image);
  return pi.preimage(shifted) + 1;
}

// Non-oblivious Poisson reference: materializes the template samples privately
// and lays them out by position. Entry p (0-based) of the result is the
// (element key, sample id) expected at output position p+1, or nullopt for a
// dummy.
inline std::vector<std::optional<std::pair<std::uint64_t, std::uint64_t>>>
reference_poisson_layout(const PoissonTemplateView& t,
                         const std::vector<std::uint64_t>& pi1_image,
                         const PoissonPrivateMeta& meta) {
  const std::uint64_t n = t.n();
  SecretPermutation pi = SecretPermutation::from_image(pi1_image);
  std::vector<std::uint64_t> offsets(meta.k_prime, 0);
  for (std::uint64_t i = 1; i < meta.k_prime; ++i) {
    offsets[i] = offsets[i - 1] + meta.sizes[i - 1];
  }
  std::vector<std::optional<std::pair<std::uint64_t, std::uint64_t>>> out(n);
  std::uint64_t consumed = 0;
  for (std::uint64_t l = 1; l <= n; ++l) {
    std::uint64_t replicas = 0;
    for (std::uint64_t i = 1; i <= meta.k_prime; ++i) {
      if (t.contains(i, l)) ++replicas;
    }
    if (replicas == 0) continue;
    const std::uint64_t elem_key = pi.preimage(consumed) + 1;
    for (std::uint64_t i = 1; i <= meta.k_prime; ++i) {
      if (!t.contains(i, l)) continue;
      const std::uint64_t pos = offsets[i - 1] + t.position(i, l);
      out[pos - 1] = {elem_key, i};
    }
    consumed += replicas;
  }
  return out;
}

}  // namespace oblsamp::test
