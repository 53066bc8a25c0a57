#include "remapsim/cache.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace remapsim {

std::uint64_t HierarchyConfig::mem_latency_cycles() const {
  return static_cast<std::uint64_t>(
      std::llround(mem_ctrl_latency_ns * cpu_freq_ghz));
}

void HierarchyConfig::validate() const {
  if (levels.empty())
    throw std::invalid_argument("cache hierarchy needs at least one level");
  if (cpu_freq_ghz <= 0)
    throw std::invalid_argument("cpu_freq_ghz must be positive");
  if (mem_ctrl_latency_ns < 0)
    throw std::invalid_argument("mem_ctrl_latency_ns must be non-negative");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    std::string where = "cache level " + std::to_string(i + 1);
    if (!is_pow2(l.line_size))
      throw std::invalid_argument(where + ": line_size not a power of two");
    if (l.associativity == 0)
      throw std::invalid_argument(where + ": associativity must be >= 1");
    if (l.capacity_bytes == 0 ||
        l.capacity_bytes % (static_cast<std::uint64_t>(l.associativity) *
                            l.line_size) != 0)
      throw std::invalid_argument(
          where + ": capacity not divisible by associativity * line_size");
    // Inclusion bookkeeping assumes one line size across the hierarchy.
    if (l.line_size != levels[0].line_size)
      throw std::invalid_argument(where +
                                  ": all levels must share one line_size");
  }
}

HierarchyConfig default_hierarchy() {
  HierarchyConfig cfg;
  cfg.levels = {
      {32 * 1024, 2, 64, 2, 32},
      {2 * 1024 * 1024, 8, 64, 20, 32},
  };
  cfg.mem_ctrl_latency_ns = 75.0;
  cfg.cpu_freq_ghz = 3.0;
  return cfg;
}

std::string level_name(std::uint32_t level, std::size_t n_levels) {
  if (level >= n_levels) return "MEMORY";
  return "L" + std::to_string(level + 1);
}

CacheHierarchy::CacheHierarchy(HierarchyConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  line_size_ = cfg_.levels[0].line_size;
  mem_latency_ = cfg_.mem_latency_cycles();
  for (const auto& lc : cfg_.levels) {
    Level l;
    l.cfg = lc;
    l.num_sets = lc.capacity_bytes / (lc.associativity * lc.line_size);
    l.ways.resize(l.num_sets * lc.associativity);
    levels_.push_back(std::move(l));
  }
  stats_.resize(levels_.size());
}

void CacheHierarchy::reset() {
  for (auto& l : levels_) std::fill(l.ways.begin(), l.ways.end(), Way{});
  std::fill(stats_.begin(), stats_.end(), LevelStats{});
  memory_fetches_ = 0;
  writebacks_ = 0;
  tick_ = 0;
}

CacheHierarchy::Way* CacheHierarchy::find(std::size_t level,
                                          std::uint64_t line_base) {
  Level& l = levels_[level];
  std::uint64_t line = line_base / line_size_;
  std::uint64_t set = line % l.num_sets;
  Way* base = &l.ways[set * l.cfg.associativity];
  for (std::uint32_t w = 0; w < l.cfg.associativity; ++w)
    if (base[w].valid && base[w].tag == line) return &base[w];
  return nullptr;
}

const CacheHierarchy::Way* CacheHierarchy::find(std::size_t level,
                                                std::uint64_t line_base) const {
  return const_cast<CacheHierarchy*>(this)->find(level, line_base);
}

bool CacheHierarchy::line_present(std::size_t level, std::uint64_t addr) const {
  return find(level, (addr / line_size_) * line_size_) != nullptr;
}

// Drops the victim from every level inside `outer_level`, collecting
// dirtiness so the writeback is not lost.
void CacheHierarchy::invalidate_inner(std::size_t outer_level,
                                      std::uint64_t line_base,
                                      bool& dirty_out) {
  for (std::size_t j = 0; j < outer_level; ++j) {
    if (Way* w = find(j, line_base)) {
      dirty_out = dirty_out || w->dirty;
      *w = Way{};
    }
  }
}

void CacheHierarchy::fill(std::size_t level, std::uint64_t line_base,
                          bool dirty) {
  Level& l = levels_[level];
  std::uint64_t line = line_base / line_size_;
  std::uint64_t set = line % l.num_sets;
  Way* base = &l.ways[set * l.cfg.associativity];

  Way* victim = nullptr;
  for (std::uint32_t w = 0; w < l.cfg.associativity; ++w) {
    if (!base[w].valid) {
      victim = &base[w];
      break;
    }
    if (!victim || base[w].last_use < victim->last_use) victim = &base[w];
  }

  if (victim->valid) {
    bool victim_dirty = victim->dirty;
    std::uint64_t victim_base = victim->tag * line_size_;
    invalidate_inner(level, victim_base, victim_dirty);
    if (victim_dirty) {
      if (level + 1 < levels_.size()) {
        // Present in the next level by inclusion.
        Way* outer = find(level + 1, victim_base);
        assert(outer != nullptr);
        if (outer) outer->dirty = true;
      } else {
        ++writebacks_;
      }
    }
  }

  victim->valid = true;
  victim->dirty = dirty;
  victim->tag = line;
  victim->last_use = ++tick_;
}

std::uint64_t CacheHierarchy::access_line(std::uint64_t line_base,
                                          AccessKind kind,
                                          std::uint32_t& hit_level) {
  std::uint64_t latency = 0;
  std::size_t hit = levels_.size();
  for (std::size_t lvl = 0; lvl < levels_.size(); ++lvl) {
    if (Way* w = find(lvl, line_base)) {
      hit = lvl;
      ++stats_[lvl].hits;
      w->last_use = ++tick_;
      if (kind == AccessKind::write && lvl == 0) w->dirty = true;
      break;
    }
    ++stats_[lvl].misses;
    latency += levels_[lvl].cfg.miss_latency_cycles;
  }

  if (hit == levels_.size()) {
    ++memory_fetches_;
    std::int64_t mem = static_cast<std::int64_t>(mem_latency_);
    if (mem_delta_) mem += mem_delta_(line_base);
    latency += static_cast<std::uint64_t>(std::max<std::int64_t>(mem, 0));
  }

  // Inclusive fill of every missed level, outermost first so a victim's
  // back-invalidation cannot drop the line just inserted inside.
  for (std::size_t lvl = hit; lvl-- > 0;)
    fill(lvl, line_base, kind == AccessKind::write && lvl == 0);

  hit_level = std::max(hit_level, static_cast<std::uint32_t>(hit));
  return latency;
}

AccessResult CacheHierarchy::access(std::uint64_t addr, std::uint32_t size,
                                    AccessKind kind) {
  if (size == 0) throw std::invalid_argument("cache access of size 0");

  AccessResult r;
  std::uint64_t first = addr / line_size_;
  std::uint64_t last = (addr + size - 1) / line_size_;
  for (std::uint64_t line = first; line <= last; ++line) {
    std::uint64_t lat = access_line(line * line_size_, kind, r.hit_level);
    r.latency_cycles = std::max(r.latency_cycles, lat);
    ++r.lines_touched;
  }
  return r;
}

CacheHierarchy::StatsSnapshot CacheHierarchy::snapshot_stats() const {
  return {stats_, memory_fetches_, writebacks_};
}

void CacheHierarchy::restore_stats(const StatsSnapshot& s) {
  stats_ = s.levels;
  memory_fetches_ = s.memory_fetches;
  writebacks_ = s.writebacks;
}

}  // namespace remapsim
