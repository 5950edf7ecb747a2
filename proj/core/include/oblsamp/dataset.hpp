#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "oblsamp/memory.hpp"
#include "oblsamp/rng.hpp"

namespace oblsamp {

// Plaintext dataset: keys cover exactly [1, n], payloads all record_size bytes.
struct Dataset {
  std::uint64_t n = 0;
  std::uint32_t record_size = 0;
  std::vector<Record> elements;

  void validate() const;  // throws ConfigError on broken invariants
};

Dataset make_dataset(std::uint64_t n, std::uint32_t record_size, const Seed& seed);

// File format: magic "OBLS", version byte, n as 8-byte LE, record size as
// 4-byte LE, then n records of (8-byte LE key, payload).
void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// Encrypts the dataset into a fresh region (element layout, one slot per
// element, in key order i.e. element with key j at slot j-1).
RegionId ingest_dataset(ExternalMemory& mem, const Dataset& d, const SecretKey& key,
                        const std::string& region_name = "dataset");

// Canonical trace file: "region<TAB>op<TAB>index" lines, UTF-8, LF endings.
void write_trace_file(const AccessTrace& trace, const std::filesystem::path& path);

}  // namespace oblsamp
