#include "so2dr/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace so2dr {

std::string to_string(EngineMode mode) {
  switch (mode) {
    case EngineMode::so2dr: return "so2dr";
    case EngineMode::resreu: return "resreu";
    case EngineMode::incore: return "incore";
  }
  return "?";
}

EngineMode engine_mode_from_string(const std::string& s) {
  if (s == "so2dr") return EngineMode::so2dr;
  if (s == "resreu") return EngineMode::resreu;
  if (s == "incore") return EngineMode::incore;
  throw InvalidSpecError("unknown engine mode \"" + s + "\"");
}

void KernelPlan::validate(int radius) const {
  if (k_on < 1) throw InvalidSpecError("kernel: k_on must be at least 1");
  if (tile < 1) throw InvalidSpecError("kernel: tile must be at least 1");
  if (scratch_footprint(radius, k_on) > scratch_budget)
    throw InvalidSpecError(
        "kernel: scratch footprint " +
        std::to_string(scratch_footprint(radius, k_on)) + " bytes exceeds budget " +
        std::to_string(scratch_budget) + " (tile=" + std::to_string(tile) +
        ", k_on=" + std::to_string(k_on) + ", r=" + std::to_string(radius) + ")");
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::htod: return "htod";
    case Stage::share_read: return "share_read";
    case Stage::share_write: return "share_write";
    case Stage::kernel: return "kernel";
    case Stage::dtoh: return "dtoh";
  }
  return "?";
}

std::uint64_t so2dr_arena_bytes(const RunConfig& config, const KernelPlan& kernel) {
  const std::uint64_t b = GridSpec::b_elem;
  const std::uint64_t work =
      (config.d_chk() + config.w_halo() * config.s_tb) * b * config.n_strm;
  const int slots = std::max(2, config.n_strm);
  const std::uint64_t share =
      static_cast<std::uint64_t>(slots) * (2ull * config.r * config.s_tb) *
      config.padded() * b;
  const std::uint64_t scratch =
      static_cast<std::uint64_t>(config.n_strm) *
      kernel.scratch_footprint(config.r, kernel.k_on);
  return work + share + scratch;
}

namespace {

// Internal signal used to unwind blocked workers after a failure elsewhere.
struct Aborted {};

/// Cross-chunk ordering edges within one round: chunk i+1's share read waits
/// on chunk i's publish; a slot writer waits until the previous occupant was
/// consumed. Counters are monotone per boundary.
class Gates {
 public:
  void reset(int boundaries) {
    std::lock_guard lock(mu_);
    published_.assign(std::max(boundaries, 0), 0);
    consumed_.assign(std::max(boundaries, 0), 0);
    aborted_ = false;
  }
  void publish(int b) {
    {
      std::lock_guard lock(mu_);
      ++published_[b];
    }
    cv_.notify_all();
  }
  void consume_done(int b) {
    {
      std::lock_guard lock(mu_);
      ++consumed_[b];
    }
    cv_.notify_all();
  }
  void wait_published(int b, int count) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return aborted_ || published_[b] >= count; });
    if (aborted_) throw Aborted{};
  }
  void wait_consumed(int b, int count) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return aborted_ || consumed_[b] >= count; });
    if (aborted_) throw Aborted{};
  }
  void abort() {
    {
      std::lock_guard lock(mu_);
      aborted_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<int> published_, consumed_;
  bool aborted_ = false;
};

class Engine {
 public:
  Engine(EngineMode mode, const Grid& grid, const StencilSpec& spec,
         RunConfig config, KernelPlan kernel, const HardwareModel& hw,
         const EngineHooks& hooks)
      : mode_(mode),
        spec_(spec),
        cfg_(config),
        kp_(kernel),
        hw_(hw),
        hooks_(hooks),
        host_(grid) {
    spec_.validate();
    if (mode_ == EngineMode::resreu) {
      cfg_.k_on = 1;
      kp_.k_on = 1;
    }
    if (mode_ == EngineMode::incore) cfg_.d = 1;
    cfg_.validate();
    kp_.validate(spec_.radius);
    if (grid.spec.sz != cfg_.sz || grid.spec.r != cfg_.r)
      throw ContractError("engine: grid spec does not match run config");
    if (spec_.radius != cfg_.r)
      throw ContractError("engine: stencil radius does not match run config");
    width_ = grid.spec.padded();
    interior_ = Rect{cfg_.r, cfg_.r + cfg_.sz, cfg_.r, width_ - cfg_.r};
  }

  RunResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    arena_.emplace(hw_.c_dmem);
    switch (mode_) {
      case EngineMode::so2dr: run_out_of_core(/*skewed=*/false); break;
      case EngineMode::resreu: run_out_of_core(/*skewed=*/true); break;
      case EngineMode::incore: run_incore(); break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    ledger_.audit();

    RunReport report;
    report.mode = mode_;
    report.config = cfg_;
    report.kernel = kp_;
    report.stencil_name = spec_.name();
    report.checksum = grid_checksum(host_);
    report.ledger = ledger_.snapshot();
    report.times = modeled_times(report.ledger, hw_);
    report.arena_peak = arena_->peak();
    report.arena_capacity = arena_->capacity();
    report.transfer_time_excluded = mode_ == EngineMode::incore;
    report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    std::sort(diag_.begin(), diag_.end(), [](const DiagRow& a, const DiagRow& b) {
      return std::tie(a.round, a.chunk, a.stage) < std::tie(b.round, b.chunk, b.stage);
    });
    report.diagnostics = std::move(diag_);
    return {std::move(host_), std::move(report)};
  }

 private:
  void add_diag(int round, int chunk, Stage stage, std::uint64_t bytes,
                std::uint64_t updates = 0) {
    std::lock_guard lock(diag_mu_);
    diag_.push_back({round, chunk, stage, bytes, updates});
  }

  void copy_rows(float* dst_base, int dst_stride, const float* src_base,
                 int src_stride, int rows) {
    for (int y = 0; y < rows; ++y)
      std::memcpy(dst_base + static_cast<std::size_t>(y) * dst_stride,
                  src_base + static_cast<std::size_t>(y) * src_stride,
                  static_cast<std::size_t>(width_) * sizeof(float));
  }

  void host_to_field(FieldPair& field, int which, RowInterval rows) {
    copy_rows(field.row(which, rows.lo), width_, host_.row(rows.lo), width_,
              rows.height());
  }

  void run_out_of_core(bool skewed) {
    layout_ = plan_chunks(cfg_);
    rp_ = make_round_plan(cfg_);
    const int d = cfg_.d;
    const int n_strm = cfg_.n_strm;
    const std::uint64_t b = GridSpec::b_elem;

    if (!skewed) {
      const std::uint64_t work = (cfg_.d_chk() + cfg_.w_halo() * cfg_.s_tb) * b;
      for (int k = 0; k < n_strm; ++k)
        arena_->alloc("stream" + std::to_string(k) + ".work", work);
      share_.emplace(ShareBuffer::slab_mode(*arena_, std::max(2, n_strm),
                                            2 * cfg_.r * cfg_.s_tb, width_));
    } else {
      int max_rows = 0;
      for (int i = 0; i < d; ++i) max_rows = std::max(max_rows, buffer_rows(i).height());
      const std::uint64_t work = static_cast<std::uint64_t>(max_rows) * width_ * b;
      for (int k = 0; k < n_strm; ++k)
        arena_->alloc("stream" + std::to_string(k) + ".work", work);
      share_.emplace(ShareBuffer::state_mode(*arena_, d - 1, cfg_.s_tb, 2 * cfg_.r,
                                             width_));
    }
    for (int k = 0; k < n_strm; ++k)
      arena_->alloc("stream" + std::to_string(k) + ".scratch",
                    kp_.scratch_footprint(cfg_.r, kp_.k_on));

    std::vector<FieldPair> contexts(n_strm);

    for (int round = 0; round < rp_.rounds; ++round) {
      const int k_eff = rp_.steps_in_round(round);
      gates_.reset(d - 1);
      std::atomic<int> next{0};
      std::exception_ptr first_error;
      std::mutex err_mu;

      auto worker = [&](int w) {
        try {
          for (;;) {
            const int i = next.fetch_add(1);
            if (i >= d) break;
            if (skewed)
              resreu_chunk(round, k_eff, i, contexts[w]);
            else
              so2dr_chunk(round, k_eff, i, contexts[w]);
          }
        } catch (const Aborted&) {
        } catch (...) {
          {
            std::lock_guard lock(err_mu);
            if (!first_error) first_error = std::current_exception();
          }
          gates_.abort();
        }
      };

      std::vector<std::thread> threads;
      threads.reserve(n_strm);
      for (int w = 0; w < n_strm; ++w) threads.emplace_back(worker, w);
      for (auto& t : threads) t.join();
      if (first_error) std::rethrow_exception(first_error);

      share_->reset_round();
      ledger_.record(Counter::rounds, 1);
    }
  }

  void so2dr_chunk(int round, int k_eff, int i, FieldPair& field) {
    const ChunkIntervals& ci = layout_.chunks[i];
    field.resize(ci.working.lo, ci.working.height(), width_);

    host_to_field(field, 0, ci.transfer);
    const std::uint64_t htod_bytes =
        static_cast<std::uint64_t>(ci.transfer.height()) * width_ * sizeof(float);
    ledger_.record(Counter::htod, static_cast<std::int64_t>(htod_bytes));
    add_diag(round, i, Stage::htod, htod_bytes);
    init_ring_rows(field, i);

    if (i > 0) {
      gates_.wait_published(i - 1, 1);
      const std::size_t count =
          static_cast<std::size_t>(ci.shared_in.height()) * width_;
      share_->consume(i - 1, 0, field.row(0, ci.shared_in.lo), count, ledger_);
      gates_.consume_done(i - 1);
      add_diag(round, i, Stage::share_read, count * sizeof(float));
    }
    if (i < cfg_.d - 1) {
      const int slots = std::max(2, cfg_.n_strm);
      if (i >= slots) gates_.wait_consumed(i - slots, 1);
      const std::size_t count =
          static_cast<std::size_t>(ci.shared_out.height()) * width_;
      publish_boundary(i, 0, field.row(0, ci.shared_out.lo), count);
      gates_.publish(i);
      add_diag(round, i, Stage::share_write, count * sizeof(float));
    }

    int read = 0;
    int done = 0;
    std::uint64_t kernel_bytes = 0, kernel_updates = 0;
    const int calls = rp_.calls_in_round(round);
    for (int c = 0; c < calls; ++c) {
      const int s = rp_.steps_in_call(round, c);
      done += s;
      const RowInterval area = compute_area(layout_, i, done, k_eff);
      const KernelStats ks = fused_kernel(
          field, read, spec_, s, kp_.tile, Rect{area.lo, area.hi, 0, width_},
          interior_, Rect{ci.core.lo, ci.core.hi, 0, width_}, ledger_);
      kernel_bytes += ks.scratch_load + ks.scratch_store;
      kernel_updates += ks.updates;
      read ^= 1;
    }
    add_diag(round, i, Stage::kernel, kernel_bytes, kernel_updates);

    copy_rows(host_.row(ci.core.lo), width_, field.row(read, ci.core.lo), width_,
              ci.core.height());
    const std::uint64_t dtoh_bytes =
        static_cast<std::uint64_t>(ci.core.height()) * width_ * sizeof(float);
    ledger_.record(Counter::dtoh, static_cast<std::int64_t>(dtoh_bytes));
    add_diag(round, i, Stage::dtoh, dtoh_bytes);
  }

  /// Host rows streamed for chunk i in skewed mode: the static partition.
  RowInterval partition_rows(int i) const {
    return {i == 0 ? 0 : layout_.fence[i],
            i == cfg_.d - 1 ? width_ : layout_.fence[i + 1]};
  }

  /// Device-buffer extent for chunk i in skewed mode: partition plus room for
  /// the wavefront descending r per step and the 2r shared rows below it.
  RowInterval buffer_rows(int i) const {
    const RowInterval part = partition_rows(i);
    const int lo = i == 0 ? 0 : layout_.fence[i] - cfg_.r * cfg_.s_tb - cfg_.r;
    return {lo, part.hi};
  }

  RowInterval skewed_rows(int i, int t) const {
    return {i == 0 ? cfg_.r : layout_.fence[i] - cfg_.r * t,
            i == cfg_.d - 1 ? cfg_.r + cfg_.sz : layout_.fence[i + 1] - cfg_.r * t};
  }

  void resreu_chunk(int round, int k_eff, int i, FieldPair& field) {
    const int r = cfg_.r;
    const RowInterval part = partition_rows(i);
    const RowInterval extent = buffer_rows(i);
    field.resize(extent.lo, extent.height(), width_);

    host_to_field(field, 0, part);
    const std::uint64_t htod_bytes =
        static_cast<std::uint64_t>(part.height()) * width_ * sizeof(float);
    ledger_.record(Counter::htod, static_cast<std::int64_t>(htod_bytes));
    add_diag(round, i, Stage::htod, htod_bytes);
    init_ring_rows(field, i);

    const std::size_t share_count = static_cast<std::size_t>(2 * r) * width_;
    std::uint64_t share_w = 0, share_r = 0;
    if (i < cfg_.d - 1) {
      publish_boundary(i, 0, field.row(0, layout_.fence[i + 1] - 2 * r), share_count);
      gates_.publish(i);
      share_w += share_count * sizeof(float);
    }

    int read = 0;
    std::uint64_t kernel_bytes = 0, kernel_updates = 0;
    for (int t = 1; t <= k_eff; ++t) {
      if (i > 0) {
        gates_.wait_published(i - 1, t);
        const int dst_lo = layout_.fence[i] - r * (t - 1) - 2 * r;
        share_->consume(i - 1, t - 1, field.row(read, dst_lo), share_count, ledger_);
        share_r += share_count * sizeof(float);
      }
      const RowInterval rows = skewed_rows(i, t);
      const KernelStats ks = fused_kernel(
          field, read, spec_, 1, kp_.tile, Rect{rows.lo, rows.hi, 0, width_},
          interior_, Rect{rows.lo, rows.hi, 0, width_}, ledger_);
      kernel_bytes += ks.scratch_load + ks.scratch_store;
      kernel_updates += ks.updates;
      if (i < cfg_.d - 1 && t < k_eff) {
        const int src_lo = layout_.fence[i + 1] - r * t - 2 * r;
        publish_boundary(i, t, field.row(1 - read, src_lo), share_count);
        gates_.publish(i);
        share_w += share_count * sizeof(float);
      }
      read ^= 1;
    }
    if (share_r) add_diag(round, i, Stage::share_read, share_r);
    if (share_w) add_diag(round, i, Stage::share_write, share_w);
    add_diag(round, i, Stage::kernel, kernel_bytes, kernel_updates);

    const RowInterval owned = skewed_rows(i, k_eff);
    copy_rows(host_.row(owned.lo), width_, field.row(read, owned.lo), width_,
              owned.height());
    const std::uint64_t dtoh_bytes =
        static_cast<std::uint64_t>(owned.height()) * width_ * sizeof(float);
    ledger_.record(Counter::dtoh, static_cast<std::int64_t>(dtoh_bytes));
    add_diag(round, i, Stage::dtoh, dtoh_bytes);
  }

  /// The constant ring rows live in both ping-pong buffers; kernels keep ring
  /// columns alive via pass-through, ring rows are seeded here.
  void init_ring_rows(FieldPair& field, int i) {
    if (i == 0) host_to_field(field, 1, {0, cfg_.r});
    if (i == cfg_.d - 1) host_to_field(field, 1, {cfg_.r + cfg_.sz, width_});
  }

  void publish_boundary(int boundary, int state, const float* src,
                        std::size_t count) {
    if (hooks_.corrupt_share && hooks_.boundary == boundary) {
      const std::vector<float> zeros(count, 0.0f);
      share_->publish(boundary, state, zeros.data(), count, ledger_);
      return;
    }
    share_->publish(boundary, state, src, count, ledger_);
  }

  void run_incore() {
    const std::uint64_t grid_bytes =
        static_cast<std::uint64_t>(width_) * width_ * sizeof(float);
    arena_->alloc("grid_a", grid_bytes);
    arena_->alloc("grid_b", grid_bytes);
    arena_->alloc("stream0.scratch", kp_.scratch_footprint(cfg_.r, kp_.k_on));

    FieldPair field;
    field.resize(0, width_, width_);
    host_to_field(field, 0, {0, width_});
    ledger_.record(Counter::htod, static_cast<std::int64_t>(grid_bytes));
    add_diag(0, 0, Stage::htod, grid_bytes);
    host_to_field(field, 1, {0, cfg_.r});
    host_to_field(field, 1, {cfg_.r + cfg_.sz, width_});

    int read = 0;
    int done = 0;
    std::uint64_t kernel_bytes = 0, kernel_updates = 0;
    const Rect region{cfg_.r, cfg_.r + cfg_.sz, 0, width_};
    while (done < cfg_.n) {
      const int s = std::min(kp_.k_on, cfg_.n - done);
      const KernelStats ks = fused_kernel(field, read, spec_, s, kp_.tile, region,
                                          interior_, region, ledger_);
      kernel_bytes += ks.scratch_load + ks.scratch_store;
      kernel_updates += ks.updates;
      read ^= 1;
      done += s;
    }
    add_diag(0, 0, Stage::kernel, kernel_bytes, kernel_updates);

    copy_rows(host_.row(cfg_.r), width_, field.row(read, cfg_.r), width_, cfg_.sz);
    const std::uint64_t dtoh_bytes =
        static_cast<std::uint64_t>(cfg_.sz) * width_ * sizeof(float);
    ledger_.record(Counter::dtoh, static_cast<std::int64_t>(dtoh_bytes));
    add_diag(0, 0, Stage::dtoh, dtoh_bytes);
    ledger_.record(Counter::rounds, 1);
  }

  EngineMode mode_;
  StencilSpec spec_;
  RunConfig cfg_;
  KernelPlan kp_;
  HardwareModel hw_;
  EngineHooks hooks_;
  Grid host_;
  int width_ = 0;
  Rect interior_;

  std::optional<DeviceArena> arena_;
  std::optional<ShareBuffer> share_;
  TransferLedger ledger_;
  ChunkLayout layout_;
  RoundPlan rp_;
  Gates gates_;
  std::mutex diag_mu_;
  std::vector<DiagRow> diag_;
};

}  // namespace

RunResult run_engine(EngineMode mode, const Grid& grid, const StencilSpec& spec,
                     RunConfig config, KernelPlan kernel, const HardwareModel& hw,
                     const EngineHooks& hooks) {
  hw.validate();
  Engine engine(mode, grid, spec, config, kernel, hw, hooks);
  return engine.run();
}

}  // namespace so2dr
