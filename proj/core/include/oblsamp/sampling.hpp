#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "oblsamp/memory.hpp"
#include "oblsamp/sample_template.hpp"
#include "oblsamp/shuffle.hpp"

namespace oblsamp {

// Derivation convention tying one sampling run's secrets to a master seed.
struct RunSeeds {
  Seed pi1, pi2, tmpl, shuffle;

  static RunSeeds derive(const Seed& master) {
    return {derive_seed(master, "run.pi1"), derive_seed(master, "run.pi2"),
            derive_seed(master, "run.template"), derive_seed(master, "run.shuffle")};
  }
};

struct ScanOptions {
  // The final append would read past the end of the dataset; a dummy re-read
  // of the last slot keeps every append paired with one read. Disabling this
  // is an audit-harness hook that reproduces the leaky variant.
  bool terminal_dummy_read = true;
};

struct SamplesOptions {
  bool want_transcript = false;
  ScanOptions scan;
};

// Secret side-channel-free record of a run's internals, for analysis and
// tests only; never serialized next to the public output.
struct RunTranscript {
  std::vector<std::uint64_t> pi1;         // image vector of the first shuffle
  std::vector<std::uint64_t> pi2;         // image vector of the second shuffle
  std::vector<std::uint64_t> replication; // r_j over the instantiated samples
};

struct SwoRun {
  RegionId scratch = 0;  // replication stream, post second shuffle
  RegionId output = 0;   // grouped samples, segment i = [offset_i, offset_i + size_i)
  std::vector<std::uint64_t> segment_sizes;
  std::vector<std::uint64_t> revealed_ids;  // grouping-phase public sequence
  ShuffleOutcome shuffle1, shuffle2;
  std::size_t private_peak = 0;
  std::optional<RunTranscript> transcript;
};

struct PoissonPrivateMeta {
  std::uint64_t k_prime = 0;
  std::uint64_t cursize = 0;
  std::vector<std::uint64_t> sizes;  // M_1..M_k' in order
};

struct PoissonRun {
  RegionId scratch = 0;
  RegionId output = 0;  // flat S: tuple slots ordered by revealed position
  std::vector<std::uint64_t> revealed_positions;  // 1-based, a permutation of 1..n
  ShuffleOutcome shuffle1, shuffle2;
  PoissonPrivateMeta meta;  // in-TEE secret; callers must guard it
  std::size_t private_peak = 0;
  std::optional<RunTranscript> transcript;
};

// Replication scan of Algorithm-1 shape: streams the shuffled dataset once,
// appending the current element once per template sample containing the
// current key counter. Trace: two reads of slot 0, then per append one write
// to scratch and one dataset read with monotonically advancing index capped at
// the last slot — 2n+2 records independent of template and data.
void replication_scan(ExternalMemory& mem, RegionId dataset, RegionId scratch,
                      const SwoTemplateView& t, const SecretKey& key, PrivateMemory& pm,
                      const ScanOptions& opts = {});

// Poisson variant: appends carry an encrypted (id, pos) pair; after the real
// appends, dummy tuples with id 0 fill scratch to n, each paired with a dummy
// dataset read at the sequentially advancing index modulo n. Returns k' and
// cursize (the scan consumes samples 1..k' only).
PoissonPrivateMeta poisson_replication_scan(ExternalMemory& mem, RegionId dataset,
                                            RegionId scratch, const PoissonTemplateView& t,
                                            const SecretKey& key, PrivateMemory& pm);

// Reveals sample ids and routes element ciphertexts (not decrypted) into k
// contiguous output segments. Returns the revealed id sequence.
std::vector<std::uint64_t> group_by_sample_id(ExternalMemory& mem, RegionId scratch,
                                              RegionId output,
                                              const std::vector<std::uint64_t>& segment_sizes,
                                              const SecretKey& key);

// Oblivious SWO sampling: shuffle, replication scan, shuffle, group. The
// dataset region is shuffled in place; scratch and output regions are created.
SwoRun samples_swo(ExternalMemory& mem, RegionId dataset, const SwoTemplateView& t,
                   const SecretPermutation& pi1, const SecretPermutation& pi2,
                   const ShuffleConfig& cfg, const SecretKey& key, SeededRng& shuffle_rng,
                   const SamplesOptions& opts = {});

// Oblivious Poisson sampling: shuffle, scan with positions, pad with dummies,
// shuffle, then scatter by revealed positions into the flat output S.
PoissonRun samples_poisson(ExternalMemory& mem, RegionId dataset,
                           const PoissonTemplateView& t, const SecretPermutation& pi1,
                           const SecretPermutation& pi2, const ShuffleConfig& cfg,
                           const SecretKey& key, SeededRng& shuffle_rng,
                           const SamplesOptions& opts = {});

// Consumer-side helpers: decrypt samples with the secret key (and, for
// Poisson, the private boundary metadata). These read region contents
// directly — the consumer's own sequential loads are not the audited object.
std::vector<std::vector<Record>> open_swo_samples(const ExternalMemory& mem, RegionId output,
                                                  const std::vector<std::uint64_t>& segment_sizes,
                                                  const SecretKey& key);
std::vector<std::vector<Record>> open_poisson_samples(const ExternalMemory& mem,
                                                      RegionId output,
                                                      const PoissonPrivateMeta& meta,
                                                      const SecretKey& key);

}  // namespace oblsamp
