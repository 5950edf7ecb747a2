#include "oblsamp/sampling.hpp"

#include <numeric>

#include "oblsamp/errors.hpp"

namespace oblsamp {

namespace {

Ciphertext make_tuple_slot(const Record& e, const AuxRecord& aux, const SlotLayout& layout,
                           const SecretKey& key) {
  std::vector<Ciphertext> parts;
  parts.push_back(encrypt_record(e, key));
  parts.push_back(encrypt_aux(aux, key));
  return layout.join(parts);
}

}  // namespace

void replication_scan(ExternalMemory& mem, RegionId dataset, RegionId scratch,
                      const SwoTemplateView& t, const SecretKey& key, PrivateMemory& pm,
                      const ScanOptions& opts) {
  const std::uint64_t n = t.n();
  const std::uint64_t k = t.k();
  if (mem.region_size(dataset) != n || mem.region_size(scratch) != n) {
    throw ConfigError("replication scan size mismatch");
  }
  const std::size_t payload_len = mem.layout(dataset).payload_len;
  const SlotLayout tuple_layout = mem.layout(scratch);

  PrivateSlots lease(pm, 2);  // current element and the read-ahead element
  Record e = decrypt_record(mem.read(dataset, 0), key, payload_len);
  Record e_next = decrypt_record(mem.read(dataset, 0), key, payload_len);

  std::uint64_t appended = 0;
  std::uint64_t j = 1;  // key counter
  while (appended < n) {
    if (j > n) {
      throw std::logic_error("replication scan ran out of keys");
    }
    for (std::uint64_t i = 1; i <= k; ++i) {
      if (!t.contains(i, j)) continue;
      mem.write(scratch, appended, make_tuple_slot(e, {true, i, 0}, tuple_layout, key));
      ++appended;
      if (appended < n) {
        e_next = decrypt_record(mem.read(dataset, appended), key, payload_len);
      } else if (opts.terminal_dummy_read) {
        e_next = decrypt_record(mem.read(dataset, n - 1), key, payload_len);
      }
    }
    e = e_next;
    ++j;
  }
}

PoissonPrivateMeta poisson_replication_scan(ExternalMemory& mem, RegionId dataset,
                                            RegionId scratch, const PoissonTemplateView& t,
                                            const SecretKey& key, PrivateMemory& pm) {
  const std::uint64_t n = t.n();
  const std::uint64_t k = t.k();
  if (mem.region_size(dataset) != n || mem.region_size(scratch) != n) {
    throw ConfigError("poisson scan size mismatch");
  }
  const std::size_t payload_len = mem.layout(dataset).payload_len;
  const SlotLayout tuple_layout = mem.layout(scratch);

  // k' is the largest prefix of samples whose total size fits in n; zero when
  // even the first sample does not fit.
  PoissonPrivateMeta meta;
  while (meta.k_prime + 1 <= k &&
         meta.cursize + t.sample_size(meta.k_prime + 1) <= n) {
    ++meta.k_prime;
    meta.sizes.push_back(t.sample_size(meta.k_prime));
    meta.cursize += meta.sizes.back();
  }
  std::vector<std::uint64_t> offsets(meta.k_prime, 0);
  for (std::uint64_t i = 1; i < meta.k_prime; ++i) {
    offsets[i] = offsets[i - 1] + meta.sizes[i - 1];
  }

  PrivateSlots lease(pm, 2);
  Record e = decrypt_record(mem.read(dataset, 0), key, payload_len);
  Record e_next = decrypt_record(mem.read(dataset, 0), key, payload_len);

  std::uint64_t appended = 0;
  std::uint64_t l = 1;  // key counter
  while (appended < meta.cursize) {
    if (l > n) {
      throw std::logic_error("poisson scan ran out of keys");
    }
    for (std::uint64_t i = 1; i <= meta.k_prime; ++i) {
      if (!t.contains(i, l)) continue;
      const std::uint64_t pos = offsets[i - 1] + t.position(i, l);
      mem.write(scratch, appended, make_tuple_slot(e, {true, i, pos}, tuple_layout, key));
      ++appended;
      e_next = decrypt_record(mem.read(dataset, appended % n), key, payload_len);
    }
    e = e_next;
    ++l;
  }
  // Dummy padding: ids 0, positions cursize+1..n, one dummy dataset read per
  // append so the scan stays one-read-one-write throughout.
  Record dummy;
  dummy.payload.assign(payload_len, 0);
  for (std::uint64_t pos = meta.cursize + 1; pos <= n; ++pos) {
    mem.write(scratch, appended, make_tuple_slot(dummy, {false, 0, pos}, tuple_layout, key));
    ++appended;
    (void)mem.read(dataset, appended % n);
  }
  return meta;
}

std::vector<std::uint64_t> group_by_sample_id(ExternalMemory& mem, RegionId scratch,
                                              RegionId output,
                                              const std::vector<std::uint64_t>& segment_sizes,
                                              const SecretKey& key) {
  const std::uint64_t n = mem.region_size(scratch);
  const std::uint64_t k = segment_sizes.size();
  std::vector<std::uint64_t> offsets(k, 0);
  for (std::uint64_t i = 1; i < k; ++i) {
    offsets[i] = offsets[i - 1] + segment_sizes[i - 1];
  }
  std::vector<std::uint64_t> cursor(k, 0);
  std::vector<std::uint64_t> revealed;
  revealed.reserve(n);
  const SlotLayout tuple_layout = mem.layout(scratch);
  for (std::uint64_t p = 0; p < n; ++p) {
    std::vector<Ciphertext> parts = tuple_layout.split(mem.read(scratch, p));
    AuxRecord aux = decrypt_aux(parts[1], key);
    if (!aux.real || aux.a < 1 || aux.a > k) {
      throw IntegrityError("revealed sample id outside [1,k]");
    }
    const std::uint64_t i = aux.a;
    if (cursor[i - 1] >= segment_sizes[i - 1]) {
      throw IntegrityError("sample id multiplicity exceeds its size");
    }
    // The element ciphertext moves as is; only the id part was decrypted.
    mem.write(output, offsets[i - 1] + cursor[i - 1], std::move(parts[0]));
    ++cursor[i - 1];
    revealed.push_back(i);
  }
  return revealed;
}

SwoRun samples_swo(ExternalMemory& mem, RegionId dataset, const SwoTemplateView& t,
                   const SecretPermutation& pi1, const SecretPermutation& pi2,
                   const ShuffleConfig& cfg, const SecretKey& key, SeededRng& shuffle_rng,
                   const SamplesOptions& opts) {
  const std::uint64_t n = t.n();
  if (mem.region_size(dataset) != n || cfg.n != n || pi1.n() != n || pi2.n() != n) {
    throw ConfigError("samples_swo size mismatch");
  }
  SwoRun run;
  for (std::uint64_t i = 1; i <= t.k(); ++i) {
    run.segment_sizes.push_back(t.sample_size(i));
  }

  PrivateMemory pm(cfg.capacity());
  const SlotLayout elem_layout = mem.layout(dataset);
  const SlotLayout tuple_layout{elem_layout.payload_len, 1};

  mem.begin_phase("shuffle1");
  run.shuffle1 = oblivious_shuffle(mem, dataset, pi1, cfg, key, shuffle_rng, pm);
  mem.end_phase();

  run.scratch = mem.add_region("scratch", n, tuple_layout);
  mem.begin_phase("scan");
  replication_scan(mem, dataset, run.scratch, t, key, pm, opts.scan);
  mem.end_phase();

  mem.begin_phase("shuffle2");
  run.shuffle2 = oblivious_shuffle(mem, run.scratch, pi2, cfg, key, shuffle_rng, pm);
  mem.end_phase();

  run.output = mem.add_region("output", n, elem_layout);
  mem.begin_phase("group");
  run.revealed_ids = group_by_sample_id(mem, run.scratch, run.output, run.segment_sizes, key);
  mem.end_phase();

  run.private_peak = pm.peak();
  if (opts.want_transcript) {
    run.transcript = RunTranscript{pi1.image_vector(), pi2.image_vector(),
                                   replication_counts(t, t.k())};
  }
  return run;
}

PoissonRun samples_poisson(ExternalMemory& mem, RegionId dataset,
                           const PoissonTemplateView& t, const SecretPermutation& pi1,
                           const SecretPermutation& pi2, const ShuffleConfig& cfg,
                           const SecretKey& key, SeededRng& shuffle_rng,
                           const SamplesOptions& opts) {
  const std::uint64_t n = t.n();
  if (mem.region_size(dataset) != n || cfg.n != n || pi1.n() != n || pi2.n() != n) {
    throw ConfigError("samples_poisson size mismatch");
  }
  PoissonRun run;
  PrivateMemory pm(cfg.capacity());
  const SlotLayout elem_layout = mem.layout(dataset);
  const SlotLayout tuple_layout{elem_layout.payload_len, 1};

  mem.begin_phase("shuffle1");
  run.shuffle1 = oblivious_shuffle(mem, dataset, pi1, cfg, key, shuffle_rng, pm);
  mem.end_phase();

  run.scratch = mem.add_region("scratch", n, tuple_layout);
  mem.begin_phase("scan");
  run.meta = poisson_replication_scan(mem, dataset, run.scratch, t, key, pm);
  mem.end_phase();

  mem.begin_phase("shuffle2");
  run.shuffle2 = oblivious_shuffle(mem, run.scratch, pi2, cfg, key, shuffle_rng, pm);
  mem.end_phase();

  // Ordering: reveal positions and scatter tuples to their final slots. The
  // revealed values are 1..n shuffled, independent of samples by construction.
  run.output = mem.add_region("output", n, tuple_layout);
  mem.begin_phase("order");
  std::vector<bool> seen(n, false);
  run.revealed_positions.reserve(n);
  for (std::uint64_t p = 0; p < n; ++p) {
    const Ciphertext& blob = mem.read(run.scratch, p);
    std::vector<Ciphertext> parts = tuple_layout.split(blob);
    AuxRecord aux = decrypt_aux(parts[1], key);
    const std::uint64_t pos = aux.b;
    if (pos < 1 || pos > n || seen[pos - 1]) {
      throw IntegrityError("revealed positions are not a permutation of 1..n");
    }
    seen[pos - 1] = true;
    mem.write(run.output, pos - 1, Ciphertext{blob});
    run.revealed_positions.push_back(pos);
  }
  mem.end_phase();

  run.private_peak = pm.peak();
  if (opts.want_transcript) {
    run.transcript = RunTranscript{pi1.image_vector(), pi2.image_vector(),
                                   replication_counts(t, run.meta.k_prime)};
  }
  return run;
}

std::vector<std::vector<Record>> open_swo_samples(const ExternalMemory& mem, RegionId output,
                                                  const std::vector<std::uint64_t>& segment_sizes,
                                                  const SecretKey& key) {
  const std::size_t payload_len = mem.layout(output).payload_len;
  std::span<const Ciphertext> slots = mem.slots(output);
  std::vector<std::vector<Record>> samples;
  std::uint64_t off = 0;
  for (std::uint64_t size : segment_sizes) {
    std::vector<Record> sample;
    sample.reserve(size);
    for (std::uint64_t p = 0; p < size; ++p) {
      Record r = decrypt_record(slots[off + p], key, payload_len);
      if (!r.real) {
        throw IntegrityError("dummy element inside an SWO sample");
      }
      sample.push_back(std::move(r));
    }
    off += size;
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::vector<std::vector<Record>> open_poisson_samples(const ExternalMemory& mem,
                                                      RegionId output,
                                                      const PoissonPrivateMeta& meta,
                                                      const SecretKey& key) {
  const SlotLayout tuple_layout = mem.layout(output);
  const std::size_t payload_len = tuple_layout.payload_len;
  std::span<const Ciphertext> slots = mem.slots(output);
  std::vector<std::vector<Record>> samples;
  std::uint64_t off = 0;
  for (std::uint64_t i = 1; i <= meta.k_prime; ++i) {
    const std::uint64_t size = meta.sizes[i - 1];
    std::vector<Record> sample;
    sample.reserve(size);
    for (std::uint64_t p = 0; p < size; ++p) {
      std::vector<Ciphertext> parts = tuple_layout.split(slots[off + p]);
      AuxRecord aux = decrypt_aux(parts[1], key);
      if (!aux.real || aux.a != i) {
        throw IntegrityError("sample boundary does not match embedded ids");
      }
      Record r = decrypt_record(parts[0], key, payload_len);
      if (!r.real) {
        throw IntegrityError("dummy element inside a Poisson sample");
      }
      sample.push_back(std::move(r));
    }
    off += size;
    samples.push_back(std::move(sample));
  }
  for (std::uint64_t p = meta.cursize; p < slots.size(); ++p) {
    std::vector<Ciphertext> parts = tuple_layout.split(slots[p]);
    Record r = decrypt_record(parts[0], key, payload_len);
    if (r.real) {
      throw IntegrityError("real element in the dummy tail");
    }
  }
  return samples;
}

}  // namespace oblsamp
