#include "oblsamp/prp.hpp"

#include <bit>

#include "oblsamp/crypto.hpp"
#include "oblsamp/errors.hpp"

namespace oblsamp {

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Prp::Prp(const Seed& seed, std::uint64_t domain) : domain_(domain) {
  if (domain == 0) {
    throw ConfigError("prp domain must be positive");
  }
  unsigned bits = domain > 1 ? std::bit_width(domain - 1) : 1;
  half_bits_ = std::max(4u, (bits + 1) / 2);
  if (2 * half_bits_ > 62) {
    throw ConfigError("prp domain too large");
  }
  half_mask_ = (std::uint64_t{1} << half_bits_) - 1;

  round_keys_.resize(2 * kRounds);
  Bytes material(round_keys_.size() * 8);
  Bytes label = {'p', 'r', 'p', '.', 'k', 'e', 'y', 's'};
  keyed_hash(seed.bytes, label, std::span(material).subspan(0, 64));
  // expand: block i+1 = H(seed; block i)
  for (std::size_t off = 64; off < material.size(); off += 64) {
    std::size_t len = std::min<std::size_t>(64, material.size() - off);
    keyed_hash(seed.bytes, std::span(material).subspan(off - 64, 64),
               std::span(material).subspan(off, len));
  }
  for (std::size_t i = 0; i < round_keys_.size(); ++i) {
    round_keys_[i] = get_u64_le(std::span(material).subspan(i * 8, 8));
  }
}

std::uint64_t Prp::feistel(std::uint64_t x) const {
  std::uint64_t left = x >> half_bits_;
  std::uint64_t right = x & half_mask_;
  for (unsigned r = 0; r < kRounds; ++r) {
    std::uint64_t f =
        mix64(mix64(right ^ round_keys_[2 * r]) ^ round_keys_[2 * r + 1]) & half_mask_;
    std::uint64_t next_right = left ^ f;
    left = right;
    right = next_right;
  }
  return (left << half_bits_) | right;
}

std::uint64_t Prp::evaluate(std::uint64_t j) const {
  if (j < 1 || j > domain_) {
    throw ConfigError("prp input out of domain");
  }
  if (domain_ == 1) return 1;
  std::uint64_t x = j - 1;
  do {
    x = feistel(x);
  } while (x >= domain_);
  return x + 1;
}

}  // namespace oblsamp
