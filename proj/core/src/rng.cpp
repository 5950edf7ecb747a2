#include "oblsamp/rng.hpp"

#include <sodium.h>

#include <cmath>
#include <cstring>

#include "oblsamp/errors.hpp"

namespace oblsamp {

SeededRng::SeededRng(const Seed& seed) {
  std::memcpy(key_.data(), seed.bytes.data(), key_.size());
  pos_ = buffer_.size();  // force refill on first use
}

void SeededRng::refill() {
  std::uint8_t nonce[8];
  for (int i = 0; i < 8; ++i) {
    nonce[i] = static_cast<std::uint8_t>(block_counter_ >> (8 * i));
  }
  ++block_counter_;
  if (crypto_stream_chacha20(buffer_.data(), buffer_.size(), nonce, key_.data()) != 0) {
    throw std::runtime_error("chacha20 stream failed");
  }
  pos_ = 0;
}

void SeededRng::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buffer_.size()) refill();
    std::size_t take = std::min(out.size() - done, buffer_.size() - pos_);
    std::memcpy(out.data() + done, buffer_.data() + pos_, take);
    pos_ += take;
    done += take;
  }
}

std::uint64_t SeededRng::next_u64() {
  std::uint8_t raw[8];
  fill(raw);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(raw[i]) << (8 * i);
  }
  return v;
}

std::uint64_t SeededRng::uniform_below(std::uint64_t bound) {
  if (bound == 0) {
    throw ConfigError("uniform_below bound must be positive");
  }
  if ((bound & (bound - 1)) == 0) {
    return next_u64() & (bound - 1);
  }
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double SeededRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Seed SeededRng::fork(std::uint64_t index) const {
  Seed base;
  std::memcpy(base.bytes.data(), key_.data(), base.bytes.size());
  return derive_seed(base, "rng.fork", index);
}

std::uint64_t binomial_draw(SeededRng& rng, std::uint64_t n, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ConfigError("binomial_draw requires p in (0,1)");
  }
  if (n == 0) return 0;
  const double u = rng.next_double();
  // log pmf(0) = n log(1-p); pmf(v+1)/pmf(v) = (n-v)/(v+1) * p/(1-p)
  const double log_ratio_base = std::log(p) - std::log1p(-p);
  double log_pmf = static_cast<double>(n) * std::log1p(-p);
  double cdf = std::exp(log_pmf);
  std::uint64_t v = 0;
  while (cdf <= u && v < n) {
    log_pmf += std::log(static_cast<double>(n - v)) - std::log(static_cast<double>(v + 1)) +
               log_ratio_base;
    ++v;
    cdf += std::exp(log_pmf);
  }
  return v;
}

}  // namespace oblsamp
