#pragma once

// Ties translation, cache and DRAM together: runs a trace under a remap
// plan, measures either total cycles over a fixed trace or operations
// completed within a fixed cycle budget, sweeps all canonical plans, and
// computes member access-frequency/affinity metrics.
//
// Cost model: every logical (pre-translation) trace op charges a base cost
// of one cycle plus the latency of its translated cache accesses.  The
// model is in-order and blocking; comparisons between plans are meaningful,
// absolute slowdown percentages are not claimed.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "remapsim/access.hpp"
#include "remapsim/cache.hpp"
#include "remapsim/dram.hpp"
#include "remapsim/layout.hpp"

namespace remapsim {

enum class RunMode : std::uint8_t { fixed_trace, fixed_budget };

struct RunOptions {
  RunMode mode = RunMode::fixed_trace;
  std::uint64_t budget_cycles = 100'000'000;  // fixed_budget only
  std::uint64_t warmup_ops = 0;  // fixed_trace: ops whose cycles are discarded
  std::uint64_t seed = 1;
};

struct DramConfig {
  DramGeometry geometry = default_geometry();
  std::optional<RowPolicy> approx;  // absent = approximation disabled
};

struct SimReport {
  std::uint64_t plan_bitmask = 0;
  std::vector<std::string> remapped_members;
  std::uint64_t total_cycles = 0;
  std::uint64_t ops_completed = 0;
  std::vector<std::uint64_t> level_hits;
  std::vector<std::uint64_t> level_misses;
  std::uint64_t mem_accesses = 0;  // lines fetched from memory
  std::uint64_t flips = 0;
  std::uint64_t approx_bits = 0;  // bits subjected to error injection
  // ops per identity-plan op (fixed_budget) or identity cycles over plan
  // cycles (fixed_trace); identity plan = exactly 1.0, lower = worse.
  // NaN until apply_normalization() has seen the identity baseline.
  double normalized_ops = 0.0;
  FlipLog flip_log;
};

// Simulates one trace under one plan.  The error-injection stream is
// seeded from (options.seed, plan bitmask) so a plan's results do not
// depend on which other plans run, or in what order.
// Throws std::invalid_argument on an empty trace or a zero budget.
SimReport run(const Trace& trace, const StructLayout& layout,
              const RemapPlan& plan, const RegionSpec& region,
              const HierarchyConfig& hierarchy, const DramConfig& dram,
              const RunOptions& options);

// One report per canonical plan (2^(n-1) of them), identity included,
// normalized and sorted ascending by normalized_ops (worst first).  Plans
// may be simulated concurrently; reports are merged in plan order so the
// output is independent of scheduling.
std::vector<SimReport> sweep(const Trace& trace, const StructLayout& layout,
                             const RegionSpec& region,
                             const HierarchyConfig& hierarchy,
                             const DramConfig& dram, const RunOptions& options,
                             unsigned jobs = 1);

// Fills normalized_ops across reports from the identity (bitmask 0) entry.
void apply_normalization(std::vector<SimReport>& reports, RunMode mode);

// Ascending (normalized_ops, bitmask): worst plan first, deterministic.
void sort_reports(std::vector<SimReport>& reports);

struct AffinityReport {
  std::vector<std::string> member_names;
  std::vector<std::uint64_t> frequency;            // accesses touching member
  std::vector<std::vector<std::uint64_t>> matrix;  // symmetric, diag = freq
};

// Co-access counts over consecutive disjoint windows of `window` ops: two
// members gain one count per window in which both are touched.  Accesses
// outside the region are ignored.
AffinityReport affinity(const Trace& trace, const StructLayout& layout,
                        const RegionSpec& region, std::uint64_t window);

// CSV: plan,remapped,total_cycles,ops_completed,<per-level misses>,
// mem_access,flips,normalized_ops; optional final AVERAGE row.  ops are
// logical (pre-translation) trace operations, as noted in the header
// comment the writer emits.
void write_reports_csv(std::ostream& out, const std::vector<SimReport>& reports,
                       std::size_t n_levels, bool average_row);

// Writes to a temp file and renames into place.
void write_reports_csv_file(const std::filesystem::path& path,
                            const std::vector<SimReport>& reports,
                            std::size_t n_levels, bool average_row);

void write_affinity_csv(std::ostream& out, const AffinityReport& report);

}  // namespace remapsim
