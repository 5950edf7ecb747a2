#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oblsamp/crypto.hpp"

namespace oblsamp {

enum class MemOp : std::uint8_t { Read, Write };

struct TraceRecord {
  std::uint32_t region = 0;  // index into the owning trace's region name table
  MemOp op = MemOp::Read;
  std::uint64_t index = 0;  // zero-based slot position

  bool operator==(const TraceRecord&) const = default;
};

// Append-only log of adversary-visible memory operations. Canonical text form
// is one record per line: "region<TAB>op<TAB>index" with LF endings, so two
// traces are comparable byte for byte.
class AccessTrace {
 public:
  std::uint32_t intern_region(std::string_view name);
  void append(std::uint32_t region, MemOp op, std::uint64_t index);

  std::size_t size() const { return records_.size(); }
  const std::vector<TraceRecord>& records() const { return records_; }
  const std::string& region_name(std::uint32_t id) const { return region_names_[id]; }

  std::string record_text(std::size_t i) const;
  std::string to_text() const;
  std::string to_text(std::size_t begin, std::size_t end) const;

 private:
  std::vector<std::string> region_names_;
  std::vector<TraceRecord> records_;
};

// Private-memory bookkeeping in element-sized slots. Exceeding the declared
// capacity is a hard error, never a silent spill.
class PrivateMemory {
 public:
  explicit PrivateMemory(std::size_t capacity);

  void acquire(std::size_t slots);
  void release(std::size_t slots);

  std::size_t capacity() const { return capacity_; }
  std::size_t used() const { return used_; }
  std::size_t peak() const { return peak_; }

  static std::size_t default_capacity(std::uint64_t n);  // ceil(sqrt(n))

 private:
  std::size_t capacity_;
  std::size_t used_ = 0;
  std::size_t peak_ = 0;
};

// RAII slot lease.
class PrivateSlots {
 public:
  PrivateSlots(PrivateMemory& pm, std::size_t slots) : pm_(pm), slots_(slots) {
    pm_.acquire(slots_);
  }
  ~PrivateSlots() { pm_.release(slots_); }
  PrivateSlots(const PrivateSlots&) = delete;
  PrivateSlots& operator=(const PrivateSlots&) = delete;

 private:
  PrivateMemory& pm_;
  std::size_t slots_;
};

// Width layout of one external-memory slot: the encryption of one element
// record followed by aux_parts independently encrypted side values. Dummies
// fill every part, so a slot's byte width never depends on its content.
struct SlotLayout {
  std::size_t payload_len = 0;
  std::size_t aux_parts = 0;

  std::size_t slot_bytes() const {
    return record_ct_size(payload_len) + aux_parts * kAuxCtSize;
  }
  SlotLayout with_extra_aux() const { return {payload_len, aux_parts + 1}; }

  std::vector<Ciphertext> split(const Ciphertext& slot) const;
  Ciphertext join(std::span<const Ciphertext> parts) const;
  Ciphertext dummy_slot(const SecretKey& key) const;

  bool operator==(const SlotLayout&) const = default;
};

using RegionId = std::uint32_t;

struct Phase {
  std::string name;
  std::size_t begin = 0;  // record index range [begin, end) in the trace
  std::size_t end = 0;
};

// The adversary-visible half of the simulated TEE: named ciphertext arrays
// where every slot access is logged before it returns. One instance is
// confined to one logical thread of execution.
class ExternalMemory {
 public:
  RegionId add_region(std::string name, std::size_t slots, SlotLayout layout);
  std::optional<RegionId> find_region(std::string_view name) const;
  std::size_t region_count() const { return regions_.size(); }

  const Ciphertext& read(RegionId region, std::uint64_t index);
  void write(RegionId region, std::uint64_t index, Ciphertext value);

  std::size_t region_size(RegionId region) const;
  const SlotLayout& layout(RegionId region) const;
  const std::string& region_name(RegionId region) const;

  // Adversary view.
  const AccessTrace& trace() const { return trace_; }
  std::span<const Ciphertext> slots(RegionId region) const;
  std::map<std::string, std::uint64_t> access_counts() const;

  // Phase markers are harness metadata, not part of the visible trace.
  void begin_phase(std::string name);
  void end_phase();
  const std::vector<Phase>& phases() const { return phases_; }
  std::optional<Phase> phase(std::string_view name) const;

 private:
  struct RegionEntry {
    std::string name;
    SlotLayout layout;
    std::vector<Ciphertext> slots;
    std::uint32_t trace_id = 0;
  };

  const RegionEntry& checked(RegionId region, std::uint64_t index) const;

  std::vector<RegionEntry> regions_;
  AccessTrace trace_;
  std::vector<Phase> phases_;
  std::vector<std::size_t> open_phases_;
};

}  // namespace oblsamp
