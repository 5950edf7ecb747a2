#pragma once

#include <cstdint>
#include <vector>

#include "oblsamp/bytes.hpp"

namespace oblsamp {

// Seeded pseudo-random permutation on [1, n], evaluable pointwise in O(1)
// memory: a balanced Feistel network over the smallest even-bit power-of-two
// domain >= max(n, 256), cycle-walked down to [1, n]. The round keys come from
// a keyed hash of the seed; evaluation is deterministic across platforms.
//
// The 256 floor keeps the internal state space large enough that tiny domains
// (n < 16) mix to statistical uniformity; without it the handful of reachable
// round functions leaves measurable bias at chi-square scale.
class Prp {
 public:
  static constexpr unsigned kRounds = 24;  // >= 4 required; chosen with margin

  Prp(const Seed& seed, std::uint64_t domain);

  std::uint64_t domain() const { return domain_; }
  // 1-based in, 1-based out; bijective on [1, n]. Throws on j outside [1, n].
  std::uint64_t evaluate(std::uint64_t j) const;

 private:
  std::uint64_t feistel(std::uint64_t x) const;

  std::uint64_t domain_;
  unsigned half_bits_;
  std::uint64_t half_mask_;
  std::vector<std::uint64_t> round_keys_;  // two subkeys per round
};

}  // namespace oblsamp
