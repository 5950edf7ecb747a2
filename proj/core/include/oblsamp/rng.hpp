#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "oblsamp/bytes.hpp"

namespace oblsamp {

// Deterministic, platform-independent random stream (ChaCha20 keystream under
// the seed). All secret randomness in the library flows through this so that
// runs and audits reproduce exactly from a master seed.
class SeededRng {
 public:
  explicit SeededRng(const Seed& seed);

  std::uint64_t next_u64();
  // Unbiased draw from [0, bound), bound >= 1 (rejection sampling).
  std::uint64_t uniform_below(std::uint64_t bound);
  // 53-bit uniform in [0, 1).
  double next_double();
  void fill(std::span<std::uint8_t> out);

  Seed fork(std::uint64_t index) const;  // independent child stream

  template <typename T>
  void shuffle(std::vector<T>& v) {
    // Fisher-Yates; exactly uniform given an unbiased uniform_below.
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  void refill();

  std::array<std::uint8_t, 32> key_{};
  std::uint64_t block_counter_ = 0;
  std::array<std::uint8_t, 512> buffer_{};
  std::size_t pos_ = 0;
};

// Exact Binomial(n, p) draw by inverse transform. The pmf is accumulated from
// log space so that n up to ~10^6 stays in range; deterministic given the rng.
std::uint64_t binomial_draw(SeededRng& rng, std::uint64_t n, double p);

}  // namespace oblsamp
