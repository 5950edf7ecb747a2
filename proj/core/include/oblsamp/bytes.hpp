#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oblsamp {

using Bytes = std::vector<std::uint8_t>;

std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(std::string_view hex);  // throws ConfigError on odd length / bad digit

void put_u64_le(Bytes& out, std::uint64_t v);
std::uint64_t get_u64_le(std::span<const std::uint8_t> in);  // reads 8 bytes
void put_u32_le(Bytes& out, std::uint32_t v);
std::uint32_t get_u32_le(std::span<const std::uint8_t> in);

// 32-byte seed for every deterministic derivation in the library. Arbitrary
// input byte strings (e.g. CLI hex) are normalized by hashing.
struct Seed {
  std::array<std::uint8_t, 32> bytes{};

  static Seed from_bytes(std::span<const std::uint8_t> data);
  static Seed from_hex(std::string_view hex);
  static Seed os_random();

  bool operator==(const Seed&) const = default;
};

// Domain-separated sub-seed: child = H(parent; label || index).
Seed derive_seed(const Seed& parent, std::string_view label, std::uint64_t index = 0);

}  // namespace oblsamp
