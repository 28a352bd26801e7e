#include "so2dr/memsim.hpp"

#include <algorithm>
#include <cstring>

namespace so2dr {

void DeviceArena::alloc(const std::string& id, std::uint64_t bytes) {
  std::lock_guard lock(mu_);
  if (live_.count(id))
    throw ContractError("arena: allocation id \"" + id + "\" already live");
  if (used_ + bytes > capacity_)
    throw OutOfDeviceMemoryError(id, bytes, used_, capacity_);
  live_.emplace(id, bytes);
  used_ += bytes;
  peak_ = std::max(peak_, used_);
}

void DeviceArena::free(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = live_.find(id);
  if (it == live_.end())
    throw ContractError("arena: freeing unknown allocation \"" + id + "\"");
  used_ -= it->second;
  live_.erase(it);
}

std::uint64_t DeviceArena::used() const {
  std::lock_guard lock(mu_);
  return used_;
}

std::uint64_t DeviceArena::peak() const {
  std::lock_guard lock(mu_);
  return peak_;
}

std::string to_string(Counter c) {
  switch (c) {
    case Counter::htod: return "htod_bytes";
    case Counter::dtoh: return "dtoh_bytes";
    case Counter::ondevice: return "ondevice_bytes";
    case Counter::scratch_load: return "scratch_load_bytes";
    case Counter::scratch_store: return "scratch_store_bytes";
    case Counter::element_updates: return "element_updates";
    case Counter::redundant_updates: return "redundant_updates";
    case Counter::kernel_invocations: return "kernel_invocations";
    case Counter::rounds: return "rounds";
  }
  return "?";
}

std::atomic<std::uint64_t>& TransferLedger::cell(Counter c) {
  return counters_[static_cast<int>(c)];
}

void TransferLedger::record(Counter counter, std::int64_t amount) {
  if (amount < 0)
    throw ContractError("ledger: negative amount for " + to_string(counter));
  cell(counter).fetch_add(static_cast<std::uint64_t>(amount),
                          std::memory_order_relaxed);
}

LedgerSnapshot TransferLedger::snapshot() const {
  LedgerSnapshot s;
  s.htod = counters_[0].load(std::memory_order_relaxed);
  s.dtoh = counters_[1].load(std::memory_order_relaxed);
  s.ondevice = counters_[2].load(std::memory_order_relaxed);
  s.scratch_load = counters_[3].load(std::memory_order_relaxed);
  s.scratch_store = counters_[4].load(std::memory_order_relaxed);
  s.element_updates = counters_[5].load(std::memory_order_relaxed);
  s.redundant_updates = counters_[6].load(std::memory_order_relaxed);
  s.kernel_invocations = counters_[7].load(std::memory_order_relaxed);
  s.rounds = counters_[8].load(std::memory_order_relaxed);
  return s;
}

void TransferLedger::audit() const {
  const LedgerSnapshot s = snapshot();
  if (s.redundant_updates > s.element_updates)
    throw ContractError("ledger audit: redundant_updates (" +
                        std::to_string(s.redundant_updates) +
                        ") exceeds element_updates (" +
                        std::to_string(s.element_updates) + ")");
}

TimeBreakdown modeled_times(const LedgerSnapshot& ledger, const HardwareModel& hw) {
  hw.validate();
  TimeBreakdown t;
  t.t_htod = static_cast<double>(ledger.htod) / hw.bw_intc;
  t.t_dtoh = static_cast<double>(ledger.dtoh) / hw.bw_intc;
  t.t_kernel = static_cast<double>(ledger.scratch_load + ledger.scratch_store +
                                   ledger.ondevice) /
               hw.bw_dmem;
  t.t_total_serial = t.t_htod + t.t_dtoh + t.t_kernel;
  t.t_total_overlap = std::max(t.t_htod + t.t_dtoh, t.t_kernel);
  return t;
}

static std::string next_share_id() {
  static std::atomic<int> counter{0};
  const int n = counter.fetch_add(1);
  return n == 0 ? std::string("share_buffer")
                : "share_buffer#" + std::to_string(n);
}

ShareBuffer ShareBuffer::slab_mode(DeviceArena& arena, int n_slots, int slab_rows,
                                   int cols) {
  if (n_slots < 2) throw InvalidSpecError("share buffer needs at least 2 slots");
  ShareBuffer b;
  b.arena_ = &arena;
  b.arena_id_ = next_share_id();
  b.state_mode_ = false;
  b.n_slots_ = n_slots;
  b.slot_floats_ = static_cast<std::size_t>(slab_rows) * cols;
  b.bytes_ = static_cast<std::uint64_t>(n_slots) * b.slot_floats_ * sizeof(float);
  arena.alloc(b.arena_id_, b.bytes_);
  b.storage_.resize(static_cast<std::size_t>(n_slots) * b.slot_floats_);
  b.slots_.resize(n_slots);
  return b;
}

ShareBuffer ShareBuffer::state_mode(DeviceArena& arena, int boundaries, int states,
                                    int rows, int cols) {
  ShareBuffer b;
  b.arena_ = &arena;
  b.arena_id_ = next_share_id();
  b.state_mode_ = true;
  b.boundaries_ = boundaries;
  b.states_ = states;
  b.slot_floats_ = static_cast<std::size_t>(rows) * cols;
  const std::size_t total = static_cast<std::size_t>(boundaries) * states;
  b.bytes_ = static_cast<std::uint64_t>(total) * b.slot_floats_ * sizeof(float);
  arena.alloc(b.arena_id_, b.bytes_);
  b.storage_.resize(total * b.slot_floats_);
  b.slots_.resize(std::max<std::size_t>(total, 1));
  return b;
}

ShareBuffer::~ShareBuffer() {
  if (arena_) arena_->free(arena_id_);
}

ShareBuffer::ShareBuffer(ShareBuffer&& o) noexcept
    : arena_(o.arena_),
      arena_id_(std::move(o.arena_id_)),
      state_mode_(o.state_mode_),
      n_slots_(o.n_slots_),
      boundaries_(o.boundaries_),
      states_(o.states_),
      slot_floats_(o.slot_floats_),
      bytes_(o.bytes_),
      storage_(std::move(o.storage_)),
      slots_(std::move(o.slots_)) {
  o.arena_ = nullptr;
}

std::size_t ShareBuffer::slot_index(int boundary, int state) const {
  if (state_mode_) {
    if (boundary < 0 || boundary >= boundaries_ || state < 0 || state >= states_)
      throw ContractError("share buffer: (boundary, state) out of range");
    return static_cast<std::size_t>(boundary) * states_ + state;
  }
  if (boundary < 0) throw ContractError("share buffer: negative boundary");
  return static_cast<std::size_t>(boundary % n_slots_);
}

void ShareBuffer::publish(int boundary, int state, const float* src,
                          std::size_t count, TransferLedger& ledger) {
  if (count > slot_floats_)
    throw ContractError("share buffer: publish larger than slot");
  const std::size_t idx = slot_index(boundary, state);
  {
    std::lock_guard lock(mu_);
    Slot& s = slots_[idx];
    if (s.state != SlotState::empty && s.state != SlotState::consumed)
      throw ContractError("share buffer: overwriting slot written by chunk " +
                          std::to_string(s.writer) + " before it was consumed");
    s.state = SlotState::writing;
    s.writer = boundary;
  }
  std::memcpy(storage_.data() + idx * slot_floats_, src, count * sizeof(float));
  {
    std::lock_guard lock(mu_);
    slots_[idx].state = SlotState::written;
  }
  ledger.record(Counter::ondevice, static_cast<std::int64_t>(count * sizeof(float)));
}

void ShareBuffer::consume(int boundary, int state, float* dst, std::size_t count,
                          TransferLedger& ledger) {
  if (count > slot_floats_)
    throw ContractError("share buffer: consume larger than slot");
  const std::size_t idx = slot_index(boundary, state);
  {
    std::lock_guard lock(mu_);
    Slot& s = slots_[idx];
    if (s.state != SlotState::written)
      throw ContractError("share buffer: consuming a slot that was not written");
    if (s.writer != boundary)
      throw ContractError("share buffer: slot holds boundary " +
                          std::to_string(s.writer) + ", expected " +
                          std::to_string(boundary));
    s.state = SlotState::reading;
  }
  std::memcpy(dst, storage_.data() + idx * slot_floats_, count * sizeof(float));
  {
    std::lock_guard lock(mu_);
    slots_[idx].state = SlotState::consumed;
  }
  ledger.record(Counter::ondevice, static_cast<std::int64_t>(count * sizeof(float)));
}

void ShareBuffer::reset_round() {
  std::lock_guard lock(mu_);
  for (Slot& s : slots_) {
    if (s.state != SlotState::empty && s.state != SlotState::consumed)
      throw ContractError("share buffer: round ended with an unconsumed slot");
    s = Slot{};
  }
}

}  // namespace so2dr
