#include "oblsamp/shuffle.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <optional>

#include "oblsamp/errors.hpp"

namespace oblsamp {

ShuffleConfig ShuffleConfig::for_n(std::uint64_t n) {
  ShuffleConfig cfg;
  cfg.n = n;
  return cfg;
}

std::size_t ShuffleConfig::capacity() const {
  if (private_capacity != 0) return private_capacity;
  return 8 * PrivateMemory::default_capacity(n) + 1;
}

std::uint64_t ShuffleConfig::chunks() const {
  return (n + chunk() - 1) / chunk();
}

std::uint64_t ShuffleConfig::cell_slots() const {
  double expected =
      static_cast<double>(chunk()) * static_cast<double>(bucket_width()) / static_cast<double>(n);
  return static_cast<std::uint64_t>(std::ceil(padding * expected));
}

void ShuffleConfig::validate() const {
  if (n == 0) throw ConfigError("shuffle requires n >= 1");
  // TODO: recursive c-pass distribution for c > 2 with n^{1/c}-sized chunks.
  if (c != 2) throw ConfigError("pass count c=2 is the supported configuration");
  if (!(padding > 1.0)) throw ConfigError("padding factor must exceed 1");
  if (capacity() < 3) throw ConfigError("private capacity too small");
  if (retry_limit == 0) throw ConfigError("retry limit must be positive");
}

SecretPermutation::SecretPermutation(const Seed& seed, std::uint64_t n) {
  image_.resize(n);
  std::iota(image_.begin(), image_.end(), 0);
  SeededRng rng(seed);
  rng.shuffle(image_);
  build_inverse();
}

SecretPermutation SecretPermutation::identity(std::uint64_t n) {
  SecretPermutation p;
  p.image_.resize(n);
  std::iota(p.image_.begin(), p.image_.end(), 0);
  p.build_inverse();
  return p;
}

SecretPermutation SecretPermutation::from_image(std::vector<std::uint64_t> image) {
  SecretPermutation p;
  p.image_ = std::move(image);
  p.build_inverse();
  return p;
}

void SecretPermutation::build_inverse() {
  inverse_.assign(image_.size(), image_.size());
  for (std::uint64_t i = 0; i < image_.size(); ++i) {
    std::uint64_t v = image_[i];
    if (v >= image_.size() || inverse_[v] != image_.size()) {
      throw ConfigError("permutation image is not a bijection");
    }
    inverse_[v] = i;
  }
}

namespace {

// Decrypted slot held in private memory during a pass.
struct OpenSlot {
  std::vector<Bytes> parts;
};

OpenSlot open_slot(const Ciphertext& blob, const SlotLayout& layout, const SecretKey& key) {
  OpenSlot s;
  for (const Ciphertext& part : layout.split(blob)) {
    s.parts.push_back(open(part, key));
  }
  return s;
}

Ciphertext seal_slot(const OpenSlot& s, const SlotLayout& layout, const SecretKey& key) {
  std::vector<Ciphertext> parts;
  parts.reserve(s.parts.size());
  for (const Bytes& p : s.parts) {
    parts.push_back(seal(p, key));
  }
  return layout.join(parts);
}

void trivial_shuffle(ExternalMemory& mem, RegionId region, const SecretPermutation& pi,
                     const SecretKey& key, PrivateMemory& pm) {
  const std::uint64_t n = pi.n();
  const SlotLayout layout = mem.layout(region);
  PrivateSlots lease(pm, n);
  std::vector<OpenSlot> items;
  items.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    items.push_back(open_slot(mem.read(region, i), layout, key));
  }
  for (std::uint64_t p = 0; p < n; ++p) {
    mem.write(region, p, seal_slot(items[pi.preimage(p)], layout, key));
  }
}

RegionId ensure_region(ExternalMemory& mem, const std::string& name, std::size_t slots,
                       const SlotLayout& layout) {
  if (auto id = mem.find_region(name)) {
    if (mem.region_size(*id) != slots || !(mem.layout(*id) == layout)) {
      throw ConfigError("aux region exists with mismatched shape: " + name);
    }
    return *id;
  }
  return mem.add_region(name, slots, layout);
}

// Streams src in chunks, writing one fixed cell of cfg.cell_slots() slots per
// (chunk, bucket) pair; real entries carry their destination in an extra
// encrypted tag, the rest are dummies. Returns false if some cell overflowed
// (the write pattern is completed regardless, so the trace shape is fixed).
bool distribute_pass(ExternalMemory& mem, RegionId src, RegionId cells_region,
                     const std::function<std::uint64_t(std::uint64_t)>& dest_of,
                     const ShuffleConfig& cfg, const SecretKey& key, PrivateMemory& pm) {
  const std::uint64_t n = cfg.n;
  const std::uint64_t chunk = cfg.chunk();
  const std::uint64_t T = cfg.chunks();
  const std::uint64_t B = cfg.buckets();
  const std::uint64_t w = cfg.bucket_width();
  const std::uint64_t s = cfg.cell_slots();
  const SlotLayout src_layout = mem.layout(src);
  const SlotLayout cell_layout = src_layout.with_extra_aux();

  bool overflow = false;
  for (std::uint64_t t = 0; t < T; ++t) {
    const std::uint64_t lo = t * chunk;
    const std::uint64_t hi = std::min(n, lo + chunk);
    PrivateSlots lease(pm, hi - lo);
    std::vector<OpenSlot> items;
    std::vector<std::uint64_t> dests;
    items.reserve(hi - lo);
    for (std::uint64_t i = lo; i < hi; ++i) {
      items.push_back(open_slot(mem.read(src, i), src_layout, key));
      dests.push_back(dest_of(i));
    }
    for (std::uint64_t g = 0; g < B; ++g) {
      const std::uint64_t dlo = g * w;
      const std::uint64_t dhi = std::min(n, dlo + w);
      std::vector<std::uint64_t> members;
      for (std::uint64_t idx = 0; idx < items.size(); ++idx) {
        if (dests[idx] >= dlo && dests[idx] < dhi) members.push_back(idx);
      }
      if (members.size() > s) overflow = true;
      const std::uint64_t cell_base = (t * B + g) * s;
      for (std::uint64_t slot = 0; slot < s; ++slot) {
        Ciphertext out;
        if (slot < members.size() && slot < s) {
          const OpenSlot& item = items[members[slot]];
          std::vector<Ciphertext> parts;
          parts.reserve(item.parts.size() + 1);
          for (const Bytes& p : item.parts) parts.push_back(seal(p, key));
          parts.push_back(encrypt_aux({true, dests[members[slot]], 0}, key));
          out = cell_layout.join(parts);
        } else {
          out = cell_layout.dummy_slot(key);
        }
        mem.write(cells_region, cell_base + slot, std::move(out));
      }
    }
  }
  return !overflow;
}

// Streams each bucket's cells, strips dummies privately and writes the bucket's
// destination range in order, re-encrypted, tags removed.
void cleanup_pass(ExternalMemory& mem, RegionId cells_region, RegionId dst,
                  const ShuffleConfig& cfg, const SecretKey& key, PrivateMemory& pm) {
  const std::uint64_t n = cfg.n;
  const std::uint64_t T = cfg.chunks();
  const std::uint64_t B = cfg.buckets();
  const std::uint64_t w = cfg.bucket_width();
  const std::uint64_t s = cfg.cell_slots();
  const SlotLayout dst_layout = mem.layout(dst);
  const SlotLayout cell_layout = dst_layout.with_extra_aux();

  for (std::uint64_t g = 0; g < B; ++g) {
    const std::uint64_t dlo = g * w;
    const std::uint64_t dhi = std::min(n, dlo + w);
    const std::uint64_t width = dhi - dlo;
    PrivateSlots lease(pm, width);
    std::vector<std::optional<OpenSlot>> staging(width);
    for (std::uint64_t t = 0; t < T; ++t) {
      const std::uint64_t cell_base = (t * B + g) * s;
      for (std::uint64_t slot = 0; slot < s; ++slot) {
        const Ciphertext& blob = mem.read(cells_region, cell_base + slot);
        std::vector<Ciphertext> parts = cell_layout.split(blob);
        AuxRecord tag = decrypt_aux(parts.back(), key);
        if (!tag.real) continue;
        if (tag.a < dlo || tag.a >= dhi) {
          throw MemoryError("routing tag outside bucket range");
        }
        OpenSlot item;
        for (std::size_t p = 0; p + 1 < parts.size(); ++p) {
          item.parts.push_back(open(parts[p], key));
        }
        staging[tag.a - dlo] = std::move(item);
      }
    }
    for (std::uint64_t off = 0; off < width; ++off) {
      if (!staging[off]) {
        throw MemoryError("cleanup missing element for destination " +
                          std::to_string(dlo + off));
      }
      mem.write(dst, dlo + off, seal_slot(*staging[off], dst_layout, key));
    }
  }
}

}  // namespace

ShuffleOutcome oblivious_shuffle(ExternalMemory& mem, RegionId region,
                                 const SecretPermutation& pi, const ShuffleConfig& cfg,
                                 const SecretKey& key, SeededRng& rng, PrivateMemory& pm) {
  cfg.validate();
  const std::uint64_t n = cfg.n;
  if (pi.n() != n || mem.region_size(region) != n) {
    throw ConfigError("shuffle size mismatch between region, permutation and config");
  }

  ShuffleOutcome outcome;
  const std::size_t trace_start = mem.trace().size();

  if (cfg.trivial()) {
    trivial_shuffle(mem, region, pi, key, pm);
    outcome.trace_records = mem.trace().size() - trace_start;
    return outcome;
  }

  const SlotLayout layout = mem.layout(region);
  const SlotLayout cell_layout = layout.with_extra_aux();
  const std::string base = mem.region_name(region);
  const std::uint64_t cell_count = cfg.chunks() * cfg.buckets() * cfg.cell_slots();
  RegionId cells = ensure_region(mem, base + ".buckets", cell_count, cell_layout);
  RegionId mid = ensure_region(mem, base + ".mid", n, layout);

  for (unsigned attempt = 0;; ++attempt) {
    if (attempt > cfg.retry_limit) {
      throw RetryLimitError("shuffle exceeded retry limit of " +
                            std::to_string(cfg.retry_limit));
    }
    outcome.attempts = attempt + 1;
    Seed sigma_seed;
    rng.fill(sigma_seed.bytes);
    SecretPermutation sigma(sigma_seed, n);

    // Pass A: region -> mid, arranged by the fresh distribution permutation.
    if (!distribute_pass(
            mem, region, cells, [&](std::uint64_t i) { return sigma.image(i); }, cfg, key,
            pm)) {
      outcome.retries.push_back('A');
      continue;
    }
    cleanup_pass(mem, cells, mid, cfg, key, pm);

    // Pass B: mid -> region, composing to the requested permutation.
    if (!distribute_pass(
            mem, mid, cells, [&](std::uint64_t j) { return pi.image(sigma.preimage(j)); },
            cfg, key, pm)) {
      outcome.retries.push_back('B');
      continue;
    }
    cleanup_pass(mem, cells, region, cfg, key, pm);
    break;
  }

  outcome.trace_records = mem.trace().size() - trace_start;
  return outcome;
}

std::uint64_t access_cost(std::uint64_t n, const ShuffleConfig& cfg) {
  cfg.validate();
  if (cfg.n != n) {
    throw ConfigError("access_cost n/config mismatch");
  }
  if (cfg.trivial()) {
    return 2 * n;
  }
  const std::uint64_t cells = cfg.chunks() * cfg.buckets() * cfg.cell_slots();
  // Two passes, each: distribute (n reads + cells writes) then cleanup
  // (cells reads + n writes).
  return 4 * n + 4 * cells;
}

}  // namespace oblsamp
