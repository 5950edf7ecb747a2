#include "oblsamp/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

#include "oblsamp/errors.hpp"

namespace oblsamp {

namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) {
      throw std::runtime_error("libsodium initialization failed");
    }
  });
}

}  // namespace

std::string to_hex(std::span<const std::uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) {
    throw ConfigError("hex string has odd length");
  }
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) {
      throw ConfigError("invalid hex digit");
    }
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

void put_u64_le(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

std::uint64_t get_u64_le(std::span<const std::uint8_t> in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  }
  return v;
}

void put_u32_le(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

std::uint32_t get_u32_le(std::span<const std::uint8_t> in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(in[i]) << (8 * i);
  }
  return v;
}

void keyed_hash(std::span<const std::uint8_t> key, std::span<const std::uint8_t> msg,
                std::span<std::uint8_t> out) {
  ensure_sodium();
  if (crypto_generichash(out.data(), out.size(), msg.data(), msg.size(), key.data(),
                         key.size()) != 0) {
    throw std::runtime_error("keyed hash failed");
  }
}

Seed Seed::from_bytes(std::span<const std::uint8_t> data) {
  Seed s;
  keyed_hash({}, data, s.bytes);
  return s;
}

Seed Seed::from_hex(std::string_view hex) {
  Bytes raw = oblsamp::from_hex(hex);
  if (raw.empty()) {
    throw ConfigError("empty seed");
  }
  return from_bytes(raw);
}

Seed Seed::os_random() {
  ensure_sodium();
  Seed s;
  randombytes_buf(s.bytes.data(), s.bytes.size());
  return s;
}

Seed derive_seed(const Seed& parent, std::string_view label, std::uint64_t index) {
  Bytes msg(label.begin(), label.end());
  put_u64_le(msg, index);
  Seed child;
  keyed_hash(parent.bytes, msg, child.bytes);
  return child;
}

SecretKey SecretKey::derive(const Seed& seed, std::string_view label) {
  Seed s = derive_seed(seed, label);
  SecretKey k;
  std::memcpy(k.bytes.data(), s.bytes.data(), k.bytes.size());
  return k;
}

Ciphertext seal(std::span<const std::uint8_t> plaintext, const SecretKey& key) {
  ensure_sodium();
  static_assert(crypto_secretbox_NONCEBYTES == 24 && crypto_secretbox_MACBYTES == 16);
  Ciphertext c;
  c.bytes.resize(kSealOverhead + plaintext.size());
  std::uint8_t* nonce = c.bytes.data();
  std::uint8_t* body = c.bytes.data() + crypto_secretbox_NONCEBYTES;
  randombytes_buf(nonce, crypto_secretbox_NONCEBYTES);
  if (crypto_secretbox_easy(body, plaintext.data(), plaintext.size(), nonce,
                            key.bytes.data()) != 0) {
    throw std::runtime_error("encryption failed");
  }
  return c;
}

Bytes open(const Ciphertext& c, const SecretKey& key) {
  ensure_sodium();
  if (c.bytes.size() < kSealOverhead) {
    throw IntegrityError("ciphertext too short");
  }
  Bytes plain(c.bytes.size() - kSealOverhead);
  const std::uint8_t* nonce = c.bytes.data();
  const std::uint8_t* body = c.bytes.data() + crypto_secretbox_NONCEBYTES;
  if (crypto_secretbox_open_easy(plain.data(), body,
                                 c.bytes.size() - crypto_secretbox_NONCEBYTES, nonce,
                                 key.bytes.data()) != 0) {
    throw IntegrityError("authentication failed");
  }
  return plain;
}

Ciphertext reseal(const Ciphertext& c, const SecretKey& key) {
  return seal(open(c, key), key);
}

std::size_t record_plain_size(std::size_t payload_len) { return 1 + 8 + payload_len; }

std::size_t record_ct_size(std::size_t payload_len) {
  return kSealOverhead + record_plain_size(payload_len);
}

Ciphertext encrypt_record(const Record& r, const SecretKey& key) {
  Bytes plain;
  plain.reserve(record_plain_size(r.payload.size()));
  plain.push_back(r.real ? 1 : 0);
  put_u64_le(plain, r.key);
  plain.insert(plain.end(), r.payload.begin(), r.payload.end());
  return seal(plain, key);
}

Record decrypt_record(const Ciphertext& c, const SecretKey& key, std::size_t payload_len) {
  Bytes plain = open(c, key);
  if (plain.size() != record_plain_size(payload_len)) {
    throw IntegrityError("record frame size mismatch");
  }
  Record r;
  r.real = plain[0] != 0;
  r.key = get_u64_le(std::span(plain).subspan(1, 8));
  r.payload.assign(plain.begin() + 9, plain.end());
  return r;
}

Ciphertext encrypt_dummy_record(std::size_t payload_len, const SecretKey& key) {
  Record dummy;
  dummy.payload.assign(payload_len, 0);
  return encrypt_record(dummy, key);
}

Ciphertext encrypt_aux(const AuxRecord& a, const SecretKey& key) {
  Bytes plain;
  plain.reserve(kAuxPlainSize);
  plain.push_back(a.real ? 1 : 0);
  put_u64_le(plain, a.a);
  put_u64_le(plain, a.b);
  return seal(plain, key);
}

AuxRecord decrypt_aux(const Ciphertext& c, const SecretKey& key) {
  Bytes plain = open(c, key);
  if (plain.size() != kAuxPlainSize) {
    throw IntegrityError("aux frame size mismatch");
  }
  AuxRecord a;
  a.real = plain[0] != 0;
  a.a = get_u64_le(std::span(plain).subspan(1, 8));
  a.b = get_u64_le(std::span(plain).subspan(9, 8));
  return a;
}

}  // namespace oblsamp
