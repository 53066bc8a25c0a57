#pragma once

// Set-associative, inclusive, multi-level cache hierarchy over a flat
// memory-controller latency.  In-order blocking cost model: a hit in L1 is
// free (folded into the per-op base cost), a miss pays the additive miss
// penalties of every level it falls through plus the memory latency when it
// goes all the way down.  MSHR counts are recorded for configuration
// fidelity but request overlap is not modeled.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "remapsim/access.hpp"
#include "remapsim/bits.hpp"

namespace remapsim {

struct CacheLevelConfig {
  std::uint64_t capacity_bytes = 0;
  std::uint32_t associativity = 1;
  std::uint64_t line_size = 64;
  std::uint64_t miss_latency_cycles = 0;
  std::uint32_t mshrs = 32;  // recorded, not modeled
};

struct HierarchyConfig {
  std::vector<CacheLevelConfig> levels;  // L1 first
  double mem_ctrl_latency_ns = 75.0;
  double cpu_freq_ghz = 3.0;

  std::uint64_t mem_latency_cycles() const;
  // Throws std::invalid_argument on inconsistent geometry.
  void validate() const;
};

// 32 KB 2-way L1 (2 cycles/miss), 2 MB 8-way L2 (20 cycles/miss), 64 B
// lines, 75 ns memory controller at 3 GHz: a full miss costs 247 cycles.
HierarchyConfig default_hierarchy();

struct AccessResult {
  std::uint32_t hit_level = 0;  // 0-based; == levels.size() means memory
  std::uint64_t latency_cycles = 0;
  std::uint32_t lines_touched = 0;
};

struct LevelStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
};

std::string level_name(std::uint32_t level, std::size_t n_levels);

class CacheHierarchy {
 public:
  explicit CacheHierarchy(HierarchyConfig cfg);

  // Splits at line boundaries; lines are fetched in parallel so the access
  // latency is the max over its lines.  Write-allocate / write-back.
  AccessResult access(std::uint64_t addr, std::uint32_t size, AccessKind kind);

  void reset();  // invalidate everything, zero stats

  std::size_t n_levels() const { return levels_.size(); }
  const HierarchyConfig& config() const { return cfg_; }
  const std::vector<LevelStats>& stats() const { return stats_; }
  std::uint64_t memory_fetches() const { return memory_fetches_; }
  std::uint64_t writebacks() const { return writebacks_; }

  // Signed memory-latency adjustment (cycles) looked up per line fetched
  // from memory; used to model rows with relaxed timing.
  using MemDeltaFn = std::function<std::int64_t(std::uint64_t line_base)>;
  void set_memory_delta_fn(MemDeltaFn fn) { mem_delta_ = std::move(fn); }

  bool line_present(std::size_t level, std::uint64_t addr) const;

  struct StatsSnapshot {
    std::vector<LevelStats> levels;
    std::uint64_t memory_fetches = 0;
    std::uint64_t writebacks = 0;
  };
  StatsSnapshot snapshot_stats() const;
  void restore_stats(const StatsSnapshot& s);

 private:
  struct Way {
    bool valid = false;
    bool dirty = false;
    std::uint64_t tag = 0;
    std::uint64_t last_use = 0;
  };
  struct Level {
    CacheLevelConfig cfg;
    std::uint64_t num_sets = 0;
    std::vector<Way> ways;  // num_sets * associativity, set-major
  };

  std::uint64_t access_line(std::uint64_t line_base, AccessKind kind,
                            std::uint32_t& hit_level);
  Way* find(std::size_t level, std::uint64_t line_base);
  const Way* find(std::size_t level, std::uint64_t line_base) const;
  void fill(std::size_t level, std::uint64_t line_base, bool dirty);
  void invalidate_inner(std::size_t outer_level, std::uint64_t line_base,
                        bool& dirty_out);

  HierarchyConfig cfg_;
  std::vector<Level> levels_;
  std::vector<LevelStats> stats_;
  std::uint64_t memory_fetches_ = 0;
  std::uint64_t writebacks_ = 0;
  std::uint64_t mem_latency_ = 0;
  std::uint64_t line_size_ = 64;
  std::uint64_t tick_ = 0;
  MemDeltaFn mem_delta_;
};

}  // namespace remapsim
