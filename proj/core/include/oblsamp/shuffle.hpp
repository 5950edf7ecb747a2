#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oblsamp/memory.hpp"
#include "oblsamp/rng.hpp"

namespace oblsamp {

// Parameters of the two-pass distribution shuffle. Private capacity defaults
// to 8*ceil(sqrt(n)) + 1 element slots: one slot reserved for the in-flight
// record, the rest used as the streaming chunk, sized so that per-cell loads
// are large enough for the padding factor to drive overflow (and hence retry)
// probability to negligible at desk scales.
struct ShuffleConfig {
  std::uint64_t n = 0;
  unsigned c = 2;                    // pass count parameter; this artifact implements c = 2
  std::size_t private_capacity = 0;  // 0 selects the default above
  double padding = 2.0;              // cell slots per expected cell load
  unsigned retry_limit = 16;

  static ShuffleConfig for_n(std::uint64_t n);
  void validate() const;

  std::size_t capacity() const;
  std::size_t chunk() const { return capacity() - 1; }
  bool trivial() const { return n <= chunk(); }  // whole array fits privately
  std::uint64_t chunks() const;                  // ceil(n / chunk)
  std::uint64_t buckets() const { return chunks(); }
  std::uint64_t bucket_width() const { return chunk(); }
  std::uint64_t cell_slots() const;  // ceil(padding * chunk * width / n)
};

// Uniform secret permutation over [0, n), materialized privately (seeded
// Fisher-Yates). Never written to external memory in plaintext.
class SecretPermutation {
 public:
  SecretPermutation(const Seed& seed, std::uint64_t n);
  static SecretPermutation identity(std::uint64_t n);
  static SecretPermutation from_image(std::vector<std::uint64_t> image);

  std::uint64_t n() const { return static_cast<std::uint64_t>(image_.size()); }
  std::uint64_t image(std::uint64_t i) const { return image_.at(i); }
  std::uint64_t preimage(std::uint64_t p) const { return inverse_.at(p); }
  const std::vector<std::uint64_t>& image_vector() const { return image_; }

 private:
  SecretPermutation() = default;
  void build_inverse();

  std::vector<std::uint64_t> image_;
  std::vector<std::uint64_t> inverse_;
};

struct ShuffleOutcome {
  unsigned attempts = 1;
  // One char per failed attempt before the successful one: 'A' = first
  // distribution pass overflowed, 'B' = second. Adversary-visible by design.
  std::string retries;
  std::uint64_t trace_records = 0;
};

// Rearranges the region in place so that the slot formerly at index i ends at
// index pi(i), re-encrypting every part of every slot. The access sequence
// depends only on (n, cfg) and the retry outcome, never on pi or slot content.
// Bucket overflow beyond the padding aborts the attempt after completing its
// fixed write pattern and retries with a fresh distribution permutation drawn
// from rng; exceeding cfg.retry_limit throws RetryLimitError.
ShuffleOutcome oblivious_shuffle(ExternalMemory& mem, RegionId region,
                                 const SecretPermutation& pi, const ShuffleConfig& cfg,
                                 const SecretKey& key, SeededRng& rng, PrivateMemory& pm);

// Exact external-access count of a retry-free run with this configuration.
std::uint64_t access_cost(std::uint64_t n, const ShuffleConfig& cfg);

}  // namespace oblsamp
