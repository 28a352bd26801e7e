#ifndef SO2DR_MEMSIM_HPP
#define SO2DR_MEMSIM_HPP

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "so2dr/layout.hpp"

namespace so2dr {

/// Capacity-limited accounting arena standing in for device memory. Purely
/// bookkeeping: the simulation's actual storage lives in host vectors.
class DeviceArena {
 public:
  explicit DeviceArena(std::uint64_t capacity) : capacity_(capacity) {}

  /// Throws OutOfDeviceMemoryError (naming `id`) when the allocation does not
  /// fit, ContractError when `id` is already live.
  void alloc(const std::string& id, std::uint64_t bytes);
  void free(const std::string& id);

  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t used() const;
  std::uint64_t peak() const;

 private:
  std::uint64_t capacity_;
  mutable std::mutex mu_;
  std::map<std::string, std::uint64_t> live_;
  std::uint64_t used_ = 0;
  std::uint64_t peak_ = 0;
};

enum class Counter {
  htod,            // bytes
  dtoh,            // bytes
  ondevice,        // bytes (region-share copies)
  scratch_load,    // bytes
  scratch_store,   // bytes
  element_updates,
  redundant_updates,
  kernel_invocations,
  rounds,
};
std::string to_string(Counter c);

/// Plain-value copy of all counters, for reports and comparisons.
struct LedgerSnapshot {
  std::uint64_t htod = 0;
  std::uint64_t dtoh = 0;
  std::uint64_t ondevice = 0;
  std::uint64_t scratch_load = 0;
  std::uint64_t scratch_store = 0;
  std::uint64_t element_updates = 0;
  std::uint64_t redundant_updates = 0;
  std::uint64_t kernel_invocations = 0;
  std::uint64_t rounds = 0;

  bool operator==(const LedgerSnapshot&) const = default;
};

/// Monotone traffic/compute counters. Concurrent recorders see linearizable
/// updates, so totals are independent of worker interleaving.
class TransferLedger {
 public:
  /// Adds `amount` to one counter. Negative amounts are rejected.
  void record(Counter counter, std::int64_t amount);

  LedgerSnapshot snapshot() const;
  /// Throws ContractError when an invariant is broken
  /// (redundant_updates > element_updates).
  void audit() const;

 private:
  std::atomic<std::uint64_t>& cell(Counter c);
  std::atomic<std::uint64_t> counters_[9] = {};
};

/// Modeled times for a ledger under a hardware model. Kernel time is the
/// device-side traffic (scratch + region-share copies) over BW_dmem; the
/// overlap total reflects transfers hiding behind kernels across streams.
struct TimeBreakdown {
  double t_htod = 0.0;
  double t_dtoh = 0.0;
  double t_kernel = 0.0;
  double t_total_overlap = 0.0;  // max(t_htod + t_dtoh, t_kernel)
  double t_total_serial = 0.0;   // t_htod + t_dtoh + t_kernel
};

TimeBreakdown modeled_times(const LedgerSnapshot& ledger, const HardwareModel& hw);

/// Device-resident staging buffer through which adjacent chunks pass halo
/// rows. Two layouts:
///   - slab mode: n_slots rotating slots of slab_rows x cols (boundary b uses
///     slot b % n_slots); one publish/consume pair per boundary per round.
///   - state mode: per boundary, `states` sub-slots of rows x cols; one
///     publish/consume pair per (boundary, time-state).
/// Publishing over an unconsumed slot or consuming an unwritten one is a
/// protocol violation and throws; the engine's ordering edges make both
/// impossible in correct schedules. Storage is counted against the arena.
class ShareBuffer {
 public:
  static ShareBuffer slab_mode(DeviceArena& arena, int n_slots, int slab_rows,
                               int cols);
  static ShareBuffer state_mode(DeviceArena& arena, int boundaries, int states,
                                int rows, int cols);
  ~ShareBuffer();
  ShareBuffer(ShareBuffer&&) noexcept;
  ShareBuffer& operator=(ShareBuffer&&) = delete;
  ShareBuffer(const ShareBuffer&) = delete;

  /// Copies `count` floats in and records the on-device write.
  void publish(int boundary, int state, const float* src, std::size_t count,
               TransferLedger& ledger);
  /// Copies `count` floats out and records the on-device read.
  void consume(int boundary, int state, float* dst, std::size_t count,
               TransferLedger& ledger);

  /// Clears written/consumed marks between rounds (storage stays allocated).
  void reset_round();

  std::size_t slot_floats() const { return slot_floats_; }
  std::uint64_t bytes() const { return bytes_; }

 private:
  ShareBuffer() = default;
  // empty/consumed -> writing -> written -> reading -> consumed
  enum class SlotState { empty, writing, written, reading, consumed };
  struct Slot {
    SlotState state = SlotState::empty;
    int writer = -1;
  };
  std::size_t slot_index(int boundary, int state) const;

  DeviceArena* arena_ = nullptr;
  std::string arena_id_;
  bool state_mode_ = false;
  int n_slots_ = 0;
  int boundaries_ = 0;
  int states_ = 0;
  std::size_t slot_floats_ = 0;
  std::uint64_t bytes_ = 0;
  std::vector<float> storage_;
  std::vector<Slot> slots_;
  std::mutex mu_;
};

}  // namespace so2dr

#endif  // SO2DR_MEMSIM_HPP
