#include "oblsamp/memory.hpp"

#include <cmath>
#include <sstream>

#include "oblsamp/errors.hpp"

namespace oblsamp {

std::uint32_t AccessTrace::intern_region(std::string_view name) {
  for (std::uint32_t i = 0; i < region_names_.size(); ++i) {
    if (region_names_[i] == name) return i;
  }
  region_names_.emplace_back(name);
  return static_cast<std::uint32_t>(region_names_.size() - 1);
}

void AccessTrace::append(std::uint32_t region, MemOp op, std::uint64_t index) {
  records_.push_back({region, op, index});
}

std::string AccessTrace::record_text(std::size_t i) const {
  const TraceRecord& r = records_[i];
  std::ostringstream os;
  os << region_names_[r.region] << '\t' << (r.op == MemOp::Read ? "read" : "write") << '\t'
     << r.index;
  return os.str();
}

std::string AccessTrace::to_text() const { return to_text(0, records_.size()); }

std::string AccessTrace::to_text(std::size_t begin, std::size_t end) const {
  std::string out;
  for (std::size_t i = begin; i < end && i < records_.size(); ++i) {
    out += record_text(i);
    out += '\n';
  }
  return out;
}

PrivateMemory::PrivateMemory(std::size_t capacity) : capacity_(capacity) {}

void PrivateMemory::acquire(std::size_t slots) {
  if (used_ + slots > capacity_) {
    throw CapacityError("private memory over capacity: " + std::to_string(used_ + slots) +
                        " > " + std::to_string(capacity_));
  }
  used_ += slots;
  peak_ = std::max(peak_, used_);
}

void PrivateMemory::release(std::size_t slots) {
  if (slots > used_) {
    throw CapacityError("private memory release underflow");
  }
  used_ -= slots;
}

std::size_t PrivateMemory::default_capacity(std::uint64_t n) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
}

std::vector<Ciphertext> SlotLayout::split(const Ciphertext& slot) const {
  if (slot.bytes.size() != slot_bytes()) {
    throw MemoryError("slot width mismatch on split");
  }
  std::vector<Ciphertext> parts;
  parts.reserve(1 + aux_parts);
  std::size_t off = 0;
  std::size_t elem = record_ct_size(payload_len);
  parts.push_back({Bytes(slot.bytes.begin(), slot.bytes.begin() + elem)});
  off += elem;
  for (std::size_t i = 0; i < aux_parts; ++i) {
    parts.push_back({Bytes(slot.bytes.begin() + off, slot.bytes.begin() + off + kAuxCtSize)});
    off += kAuxCtSize;
  }
  return parts;
}

Ciphertext SlotLayout::join(std::span<const Ciphertext> parts) const {
  if (parts.size() != 1 + aux_parts) {
    throw MemoryError("slot part count mismatch on join");
  }
  Ciphertext out;
  out.bytes.reserve(slot_bytes());
  for (const Ciphertext& p : parts) {
    out.bytes.insert(out.bytes.end(), p.bytes.begin(), p.bytes.end());
  }
  if (out.bytes.size() != slot_bytes()) {
    throw MemoryError("slot width mismatch on join");
  }
  return out;
}

Ciphertext SlotLayout::dummy_slot(const SecretKey& key) const {
  std::vector<Ciphertext> parts;
  parts.push_back(encrypt_dummy_record(payload_len, key));
  for (std::size_t i = 0; i < aux_parts; ++i) {
    parts.push_back(encrypt_aux(AuxRecord{}, key));
  }
  return join(parts);
}

RegionId ExternalMemory::add_region(std::string name, std::size_t slots, SlotLayout layout) {
  if (find_region(name)) {
    throw ConfigError("region already exists: " + name);
  }
  RegionEntry entry;
  entry.trace_id = trace_.intern_region(name);
  entry.name = std::move(name);
  entry.layout = layout;
  entry.slots.resize(slots);
  regions_.push_back(std::move(entry));
  return static_cast<RegionId>(regions_.size() - 1);
}

std::optional<RegionId> ExternalMemory::find_region(std::string_view name) const {
  for (RegionId i = 0; i < regions_.size(); ++i) {
    if (regions_[i].name == name) return i;
  }
  return std::nullopt;
}

const ExternalMemory::RegionEntry& ExternalMemory::checked(RegionId region,
                                                           std::uint64_t index) const {
  if (region >= regions_.size()) {
    throw MemoryError("unknown region id");
  }
  const RegionEntry& entry = regions_[region];
  if (index >= entry.slots.size()) {
    throw MemoryError("slot index out of bounds: " + entry.name + "[" +
                      std::to_string(index) + "], size " + std::to_string(entry.slots.size()));
  }
  return entry;
}

const Ciphertext& ExternalMemory::read(RegionId region, std::uint64_t index) {
  const RegionEntry& entry = checked(region, index);
  trace_.append(entry.trace_id, MemOp::Read, index);
  const Ciphertext& c = entry.slots[index];
  if (c.bytes.empty()) {
    throw MemoryError("read of uninitialized slot: " + entry.name + "[" +
                      std::to_string(index) + "]");
  }
  return c;
}

void ExternalMemory::write(RegionId region, std::uint64_t index, Ciphertext value) {
  const RegionEntry& entry = checked(region, index);
  if (value.bytes.size() != entry.layout.slot_bytes()) {
    throw MemoryError("slot width mismatch on write to " + entry.name);
  }
  trace_.append(entry.trace_id, MemOp::Write, index);
  regions_[region].slots[index] = std::move(value);
}

std::size_t ExternalMemory::region_size(RegionId region) const {
  if (region >= regions_.size()) throw MemoryError("unknown region id");
  return regions_[region].slots.size();
}

const SlotLayout& ExternalMemory::layout(RegionId region) const {
  if (region >= regions_.size()) throw MemoryError("unknown region id");
  return regions_[region].layout;
}

const std::string& ExternalMemory::region_name(RegionId region) const {
  if (region >= regions_.size()) throw MemoryError("unknown region id");
  return regions_[region].name;
}

std::span<const Ciphertext> ExternalMemory::slots(RegionId region) const {
  if (region >= regions_.size()) throw MemoryError("unknown region id");
  return regions_[region].slots;
}

std::map<std::string, std::uint64_t> ExternalMemory::access_counts() const {
  std::map<std::string, std::uint64_t> counts;
  for (const TraceRecord& r : trace_.records()) {
    ++counts[trace_.region_name(r.region)];
  }
  return counts;
}

void ExternalMemory::begin_phase(std::string name) {
  phases_.push_back({std::move(name), trace_.size(), trace_.size()});
  open_phases_.push_back(phases_.size() - 1);
}

void ExternalMemory::end_phase() {
  if (open_phases_.empty()) {
    throw std::logic_error("end_phase without begin_phase");
  }
  phases_[open_phases_.back()].end = trace_.size();
  open_phases_.pop_back();
}

std::optional<Phase> ExternalMemory::phase(std::string_view name) const {
  for (const Phase& p : phases_) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

}  // namespace oblsamp
