#include "oblsamp/dataset.hpp"

#include <fstream>

#include "oblsamp/errors.hpp"

namespace oblsamp {

namespace {
constexpr char kMagic[4] = {'O', 'B', 'L', 'S'};
constexpr std::uint8_t kVersion = 1;
}  // namespace

void Dataset::validate() const {
  if (elements.size() != n) {
    throw ConfigError("dataset element count does not match n");
  }
  std::vector<bool> seen(n, false);
  for (const Record& e : elements) {
    if (!e.real) {
      throw ConfigError("dataset contains a dummy element");
    }
    if (e.key < 1 || e.key > n || seen[e.key - 1]) {
      throw ConfigError("dataset keys must be distinct and cover [1,n]");
    }
    seen[e.key - 1] = true;
    if (e.payload.size() != record_size) {
      throw ConfigError("payload length differs from the configured record size");
    }
  }
}

Dataset make_dataset(std::uint64_t n, std::uint32_t record_size, const Seed& seed) {
  if (n == 0) {
    throw ConfigError("dataset requires n >= 1");
  }
  Dataset d;
  d.n = n;
  d.record_size = record_size;
  d.elements.reserve(n);
  SeededRng rng(seed);
  for (std::uint64_t j = 1; j <= n; ++j) {
    Record e;
    e.real = true;
    e.key = j;
    e.payload.resize(record_size);
    rng.fill(e.payload);
    d.elements.push_back(std::move(e));
  }
  return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  d.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot open dataset file for writing: " + path.string());
  }
  out.write(kMagic, sizeof(kMagic));
  out.put(static_cast<char>(kVersion));
  Bytes header;
  put_u64_le(header, d.n);
  put_u32_le(header, d.record_size);
  out.write(reinterpret_cast<const char*>(header.data()),
            static_cast<std::streamsize>(header.size()));
  for (const Record& e : d.elements) {
    Bytes rec;
    put_u64_le(rec, e.key);
    rec.insert(rec.end(), e.payload.begin(), e.payload.end());
    out.write(reinterpret_cast<const char*>(rec.data()),
              static_cast<std::streamsize>(rec.size()));
  }
  if (!out) {
    throw ConfigError("failed writing dataset file: " + path.string());
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open dataset file: " + path.string());
  }
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::char_traits<char>::compare(magic, kMagic, 4) != 0) {
    throw ConfigError("bad dataset magic");
  }
  int version = in.get();
  if (version != kVersion) {
    throw ConfigError("unsupported dataset version");
  }
  std::uint8_t header[12];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) {
    throw ConfigError("truncated dataset header");
  }
  Dataset d;
  d.n = get_u64_le(std::span(header, 8));
  d.record_size = get_u32_le(std::span(header + 8, 4));
  d.elements.reserve(d.n);
  for (std::uint64_t i = 0; i < d.n; ++i) {
    std::vector<char> rec(8 + d.record_size);
    in.read(rec.data(), static_cast<std::streamsize>(rec.size()));
    if (!in) {
      throw ConfigError("truncated dataset body");
    }
    Record e;
    e.real = true;
    e.key = get_u64_le(std::span(reinterpret_cast<const std::uint8_t*>(rec.data()), 8));
    e.payload.assign(rec.begin() + 8, rec.end());
    d.elements.push_back(std::move(e));
  }
  d.validate();
  return d;
}

RegionId ingest_dataset(ExternalMemory& mem, const Dataset& d, const SecretKey& key,
                        const std::string& region_name) {
  d.validate();
  RegionId region = mem.add_region(region_name, d.n, SlotLayout{d.record_size, 0});
  mem.begin_phase("ingest");
  // Keyless datasets use array position as the key, so slot order is key order.
  std::vector<const Record*> by_key(d.n);
  for (const Record& e : d.elements) {
    by_key[e.key - 1] = &e;
  }
  for (std::uint64_t j = 0; j < d.n; ++j) {
    mem.write(region, j, encrypt_record(*by_key[j], key));
  }
  mem.end_phase();
  return region;
}

void write_trace_file(const AccessTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot open trace file for writing: " + path.string());
  }
  out << trace.to_text();
  if (!out) {
    throw ConfigError("failed writing trace file: " + path.string());
  }
}

}  // namespace oblsamp
