#pragma once

// DRAM row geometry, per-row timing/error policies and deterministic
// bit-error injection.  Timing relaxation is abstracted as a signed
// latency delta plus a per-bit error rate applied uniformly to a row;
// the row is therefore the smallest unit that can be approximated.
// Address-to-row mapping is linear (no bank/channel interleaving).

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "remapsim/access.hpp"
#include "remapsim/layout.hpp"

namespace remapsim {

struct DramGeometry {
  std::uint64_t capacity_bits = 0;
  std::uint64_t rows_per_bank = 0;
  std::uint32_t banks = 1;
  std::uint32_t ranks = 1;

  // capacity / (rows * banks * ranks), in bytes.  Throws
  // std::invalid_argument when the division does not come out even.
  std::uint64_t row_size_bytes() const;
};

// 32 Gbit, 64K rows/bank, 16 banks, 2 ranks: 2 KB rows.
DramGeometry default_geometry();

std::uint64_t addr_to_row(std::uint64_t addr, const DramGeometry& g);

enum class RowMode : std::uint8_t { nominal, approximate };

struct RowPolicy {
  RowMode mode = RowMode::nominal;
  double latency_delta_ns = 0.0;  // negative = faster than nominal
  double bit_error_rate = 0.0;    // per bit per access

  void validate() const;  // nominal => (0, 0); rate in [0, 1]
};

enum class RowTag : std::uint8_t {
  untouched,
  critical_only,
  noncritical_only,
  mixed,
};

// Tags for exactly the rows overlapped by a registered region; anything
// else reads back as untouched.
class RowClassification {
 public:
  RowClassification() = default;
  RowClassification(std::uint64_t row_size, std::map<std::uint64_t, RowTag> tags)
      : row_size_(row_size), tags_(std::move(tags)) {}

  std::uint64_t row_size() const { return row_size_; }
  RowTag tag(std::uint64_t row) const;
  const std::map<std::uint64_t, RowTag>& tags() const { return tags_; }
  std::uint64_t count(RowTag t) const;

 private:
  std::uint64_t row_size_ = 0;
  std::map<std::uint64_t, RowTag> tags_;
};

// A row is critical-only when every registered byte in it is critical,
// noncritical-only when every registered byte is non-critical, mixed
// otherwise.  Bytes outside the region's sub-ranges are ignored.
RowClassification classify_rows(const RegionMap& rm, const StructLayout& layout,
                                const DramGeometry& g);

// Fraction of non-critical bytes residing in noncritical-only rows, in
// [0, 1].  1.0 means every non-critical byte could be approximated (no
// granularity gap); vacuously 1.0 when the layout has no non-critical
// bytes.
double gap_metric(const RowClassification& cls, const RegionMap& rm,
                  const StructLayout& layout);

// Per-row policy table: noncritical-only rows get the approximate policy,
// every other row (critical-only, mixed, untouched) stays nominal.
class RowPolicyTable {
 public:
  RowPolicyTable() = default;
  RowPolicyTable(std::uint64_t row_size, RowPolicy approx,
                 std::vector<std::uint64_t> approx_rows);

  std::uint64_t row_size() const { return row_size_; }
  bool has_approx_rows() const { return !approx_rows_.empty(); }
  bool row_is_approx(std::uint64_t row) const;
  const RowPolicy& policy_for_row(std::uint64_t row) const;
  const RowPolicy& policy_for_addr(std::uint64_t addr) const;
  std::size_t approx_row_count() const { return approx_rows_.size(); }

 private:
  std::uint64_t row_size_ = 1;
  RowPolicy approx_;
  RowPolicy nominal_;
  std::vector<std::uint64_t> approx_rows_;  // sorted
};

// Requires approx.mode == approximate (throws otherwise).
RowPolicyTable assign_policies(const RowClassification& cls,
                               const RowPolicy& approx);

struct FlipEvent {
  std::uint64_t op_index = 0;
  std::uint64_t addr = 0;    // byte address in the converted layout
  std::uint32_t bit = 0;     // bit position within that byte

  bool operator==(const FlipEvent&) const = default;
};

struct FlipLog {
  // Individual events are capped so a pathological error rate cannot
  // exhaust memory; counters are always exact.
  static constexpr std::size_t kMaxEvents = 1u << 20;

  std::uint64_t seed = 0;
  std::uint64_t total_flips = 0;
  std::uint64_t bits_tested = 0;
  std::vector<FlipEvent> events;

  void record(std::uint64_t op_index, std::uint64_t addr, std::uint32_t bit);
};

// Deterministic per-bit Bernoulli error injection.  Every bit of an access
// that lands in an approximate row flips with that row's bit_error_rate;
// nominal rows never flip.  Draw order is fixed (ascending byte, then bit),
// so a (trace, policy table, seed) triple reproduces the log bit for bit.
class ErrorInjector {
 public:
  explicit ErrorInjector(std::uint64_t seed);

  void inject(const MemoryAccess& access, const RowPolicyTable& table);

  const FlipLog& log() const { return log_; }

  struct Snapshot {
    std::uint64_t total_flips;
    std::uint64_t bits_tested;
    std::size_t n_events;
  };
  Snapshot snapshot() const;
  void restore(const Snapshot& s);

 private:
  double next_uniform();  // [0, 1)

  std::mt19937_64 rng_;
  FlipLog log_;
};

}  // namespace remapsim
