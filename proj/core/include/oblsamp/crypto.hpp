#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "oblsamp/bytes.hpp"

namespace oblsamp {

// Single in-process secret. The attestation / key-provisioning flow of a real
// enclave deployment is out of scope; everything inside one run shares this key.
struct SecretKey {
  std::array<std::uint8_t, 32> bytes{};

  static SecretKey derive(const Seed& seed, std::string_view label);
};

// Opaque authenticated blob: nonce || mac || body. Probabilistic — sealing the
// same plaintext twice yields unequal byte strings.
struct Ciphertext {
  Bytes bytes;

  bool operator==(const Ciphertext&) const = default;
};

inline constexpr std::size_t kSealOverhead = 24 + 16;  // nonce + mac

Ciphertext seal(std::span<const std::uint8_t> plaintext, const SecretKey& key);
Bytes open(const Ciphertext& c, const SecretKey& key);  // throws IntegrityError
Ciphertext reseal(const Ciphertext& c, const SecretKey& key);

// Keyed hash (BLAKE2b). Used for seed derivation and PRP round keys.
void keyed_hash(std::span<const std::uint8_t> key, std::span<const std::uint8_t> msg,
                std::span<std::uint8_t> out);

// --- Plaintext frames -------------------------------------------------------
//
// Every element slot in external memory holds the encryption of a fixed-width
// record so that a dummy is byte-for-byte the same size as a real element.

struct Record {
  bool real = false;       // discriminator byte: 0 dummy, 1 real
  std::uint64_t key = 0;   // element key in [1, n]; 0 for dummies
  Bytes payload;           // fixed length per dataset

  bool operator==(const Record&) const = default;
};

// Side value carried next to an element ciphertext: (sample id, position) for
// sampling tuples, (destination, unused) for shuffle routing tags.
struct AuxRecord {
  bool real = false;
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  bool operator==(const AuxRecord&) const = default;
};

std::size_t record_plain_size(std::size_t payload_len);       // 1 + 8 + payload
inline constexpr std::size_t kAuxPlainSize = 1 + 8 + 8;

std::size_t record_ct_size(std::size_t payload_len);
inline constexpr std::size_t kAuxCtSize = kSealOverhead + kAuxPlainSize;

Ciphertext encrypt_record(const Record& r, const SecretKey& key);
Record decrypt_record(const Ciphertext& c, const SecretKey& key, std::size_t payload_len);
Ciphertext encrypt_dummy_record(std::size_t payload_len, const SecretKey& key);

Ciphertext encrypt_aux(const AuxRecord& a, const SecretKey& key);
AuxRecord decrypt_aux(const Ciphertext& c, const SecretKey& key);

}  // namespace oblsamp
