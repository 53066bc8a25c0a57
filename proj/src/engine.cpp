#include "remapsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace remapsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t injection_seed(std::uint64_t seed, std::uint64_t plan_bitmask) {
  return splitmix64(seed ^ splitmix64(plan_bitmask + 1));
}

}  // namespace

SimReport run(const Trace& trace, const StructLayout& layout,
              const RemapPlan& plan, const RegionSpec& region,
              const HierarchyConfig& hierarchy, const DramConfig& dram,
              const RunOptions& options) {
  if (trace.empty()) throw std::invalid_argument("cannot simulate an empty trace");
  if (options.mode == RunMode::fixed_budget && options.budget_cycles == 0)
    throw std::invalid_argument("fixed_budget needs a nonzero cycle budget");

  RegionMap rm = build_region_map(layout, plan, region);
  CacheHierarchy cache(hierarchy);

  RowPolicyTable policy_table;
  std::optional<ErrorInjector> injector;
  if (dram.approx) {
    dram.approx->validate();
    if (dram.approx->mode != RowMode::approximate)
      throw std::invalid_argument("dram approx policy must be approximate");
    RowClassification cls = classify_rows(rm, layout, dram.geometry);
    policy_table = assign_policies(cls, *dram.approx);
    injector.emplace(injection_seed(options.seed, plan.bitmask()));
    const double ghz = hierarchy.cpu_freq_ghz;
    cache.set_memory_delta_fn([policy_table, ghz](std::uint64_t line_base) {
      const RowPolicy& p = policy_table.policy_for_addr(line_base);
      return static_cast<std::int64_t>(std::llround(p.latency_delta_ns * ghz));
    });
  }

  SimReport report;
  report.plan_bitmask = plan.bitmask();
  report.remapped_members = plan.remapped_names(layout);
  report.normalized_ops = std::numeric_limits<double>::quiet_NaN();

  std::uint64_t cycles = 0;
  std::uint64_t ops = 0;
  for (const auto& op : trace) {
    CacheHierarchy::StatsSnapshot stats_before;
    ErrorInjector::Snapshot inj_before{};
    if (options.mode == RunMode::fixed_budget) {
      stats_before = cache.snapshot_stats();
      if (injector) inj_before = injector->snapshot();
    }

    std::uint64_t cost = 1;  // base cost per op
    for (const auto& out : translate(rm, layout, op)) {
      cost += cache.access(out.addr, out.size, out.kind).latency_cycles;
      if (injector) injector->inject(out, policy_table);
    }

    if (options.mode == RunMode::fixed_budget) {
      if (cycles + cost > options.budget_cycles) {
        // Partial final op: roll its stats back and stop.
        cache.restore_stats(stats_before);
        if (injector) injector->restore(inj_before);
        break;
      }
      cycles += cost;
      ++ops;
    } else {
      if (ops >= options.warmup_ops) cycles += cost;
      ++ops;
    }
  }

  report.total_cycles = cycles;
  report.ops_completed = ops;
  for (const auto& s : cache.stats()) {
    report.level_hits.push_back(s.hits);
    report.level_misses.push_back(s.misses);
  }
  report.mem_accesses = cache.memory_fetches();
  if (injector) {
    report.flips = injector->log().total_flips;
    report.approx_bits = injector->log().bits_tested;
    report.flip_log = injector->log();
  }
  return report;
}

void apply_normalization(std::vector<SimReport>& reports, RunMode mode) {
  const SimReport* identity = nullptr;
  for (const auto& r : reports)
    if (r.plan_bitmask == 0) identity = &r;
  if (!identity)
    throw std::invalid_argument("normalization needs the identity plan");

  for (auto& r : reports) {
    if (r.plan_bitmask == 0) {
      r.normalized_ops = 1.0;
      continue;
    }
    if (mode == RunMode::fixed_budget) {
      r.normalized_ops =
          identity->ops_completed == 0
              ? std::numeric_limits<double>::quiet_NaN()
              : static_cast<double>(r.ops_completed) /
                    static_cast<double>(identity->ops_completed);
    } else {
      r.normalized_ops =
          r.total_cycles == 0
              ? std::numeric_limits<double>::quiet_NaN()
              : static_cast<double>(identity->total_cycles) /
                    static_cast<double>(r.total_cycles);
    }
  }
}

void sort_reports(std::vector<SimReport>& reports) {
  std::stable_sort(reports.begin(), reports.end(),
                   [](const SimReport& a, const SimReport& b) {
                     if (a.normalized_ops != b.normalized_ops)
                       return a.normalized_ops < b.normalized_ops;
                     return a.plan_bitmask < b.plan_bitmask;
                   });
}

std::vector<SimReport> sweep(const Trace& trace, const StructLayout& layout,
                             const RegionSpec& region,
                             const HierarchyConfig& hierarchy,
                             const DramConfig& dram, const RunOptions& options,
                             unsigned jobs) {
  auto plans = enumerate_plans(layout.n_members());
  std::vector<SimReport> reports(plans.size());

  unsigned workers = std::max(1u, jobs);
  workers = static_cast<unsigned>(
      std::min<std::size_t>(workers, plans.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= plans.size() || failed.load()) return;
      try {
        reports[i] =
            run(trace, layout, plans[i], region, hierarchy, dram, options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  apply_normalization(reports, options.mode);
  sort_reports(reports);
  return reports;
}

AffinityReport affinity(const Trace& trace, const StructLayout& layout,
                        const RegionSpec& region, std::uint64_t window) {
  if (window == 0) throw std::invalid_argument("affinity window must be >= 1");

  const std::size_t n = layout.n_members();
  AffinityReport rep;
  for (const auto& m : layout.members()) rep.member_names.push_back(m.name);
  rep.frequency.assign(n, 0);
  rep.matrix.assign(n, std::vector<std::uint64_t>(n, 0));

  const std::uint64_t region_end =
      region.base + region.elem_count * layout.stride();

  auto members_touched = [&](const MemoryAccess& a, std::set<std::size_t>& out) {
    if (a.addr < region.base || a.addr >= region_end) return;
    std::uint64_t p = a.addr;
    const std::uint64_t end = std::min<std::uint64_t>(a.addr + a.size, region_end);
    while (p < end) {
      std::uint64_t rem = (p - region.base) % layout.stride();
      if (auto m = layout.member_at(rem)) {
        out.insert(*m);
        p += layout.member(*m).size - (rem - layout.offset(*m));
      } else {
        p += layout.next_member_boundary(rem) - rem;
      }
    }
  };

  std::set<std::size_t> in_window;
  std::uint64_t ops_in_window = 0;
  auto close_window = [&]() {
    for (auto a = in_window.begin(); a != in_window.end(); ++a)
      for (auto b = std::next(a); b != in_window.end(); ++b) {
        ++rep.matrix[*a][*b];
        ++rep.matrix[*b][*a];
      }
    in_window.clear();
    ops_in_window = 0;
  };

  for (const auto& op : trace) {
    std::set<std::size_t> touched;
    members_touched(op, touched);
    for (std::size_t m : touched) ++rep.frequency[m];
    in_window.insert(touched.begin(), touched.end());
    if (++ops_in_window == window) close_window();
  }
  if (ops_in_window > 0) close_window();

  for (std::size_t m = 0; m < n; ++m) rep.matrix[m][m] = rep.frequency[m];
  return rep;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  if (std::isnan(v)) return "nan";
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void write_reports_csv(std::ostream& out, const std::vector<SimReport>& reports,
                       std::size_t n_levels, bool average_row) {
  out << "# ops are logical trace operations (pre-split by the remapper)\n";
  out << "plan,remapped,total_cycles,ops_completed";
  for (std::size_t l = 0; l < n_levels; ++l)
    out << ",l" << (l + 1) << "_miss";
  out << ",mem_access,flips,normalized_ops\n";

  char buf[64];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "0x%" PRIx64, r.plan_bitmask);
    out << buf << ",";
    for (std::size_t i = 0; i < r.remapped_members.size(); ++i)
      out << (i ? ";" : "") << r.remapped_members[i];
    out << "," << r.total_cycles << "," << r.ops_completed;
    for (std::size_t l = 0; l < n_levels; ++l)
      out << "," << (l < r.level_misses.size() ? r.level_misses[l] : 0);
    out << "," << r.mem_accesses << "," << r.flips << ","
        << format_double(r.normalized_ops) << "\n";
  }

  if (average_row && !reports.empty()) {
    const double n = static_cast<double>(reports.size());
    auto mean = [n](auto sum) { return static_cast<double>(sum) / n; };
    std::uint64_t cycles = 0, ops = 0, mem = 0, flips = 0;
    std::vector<std::uint64_t> misses(n_levels, 0);
    double norm = 0.0;
    for (const auto& r : reports) {
      cycles += r.total_cycles;
      ops += r.ops_completed;
      mem += r.mem_accesses;
      flips += r.flips;
      for (std::size_t l = 0; l < n_levels && l < r.level_misses.size(); ++l)
        misses[l] += r.level_misses[l];
      norm += r.normalized_ops;
    }
    out << "AVERAGE,," << format_double(mean(cycles)) << ","
        << format_double(mean(ops));
    for (std::size_t l = 0; l < n_levels; ++l)
      out << "," << format_double(mean(misses[l]));
    out << "," << format_double(mean(mem)) << "," << format_double(mean(flips))
        << "," << format_double(norm / n) << "\n";
  }
}

void write_reports_csv_file(const std::filesystem::path& path,
                            const std::vector<SimReport>& reports,
                            std::size_t n_levels, bool average_row) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out)
      throw std::runtime_error("cannot open output file: " + tmp.string());
    write_reports_csv(out, reports, n_levels, average_row);
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_affinity_csv(std::ostream& out, const AffinityReport& report) {
  out << "member,frequency";
  for (const auto& n : report.member_names) out << "," << n;
  out << "\n";
  for (std::size_t i = 0; i < report.member_names.size(); ++i) {
    out << report.member_names[i] << "," << report.frequency[i];
    for (std::size_t j = 0; j < report.member_names.size(); ++j)
      out << "," << report.matrix[i][j];
    out << "\n";
  }
}

}  // namespace remapsim
