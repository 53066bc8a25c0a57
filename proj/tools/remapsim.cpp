// remapsim command-line front end.
//
// Subcommands:
//   simulate   run one trace under one remap plan, write a one-row CSV
//   sweep      run every canonical remap plan, write a sorted CSV + average
//   rowmap     classify DRAM rows by criticality and report the gap metric
//   gen-trace  write a synthetic trace file
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "remapsim/config.hpp"
#include "remapsim/engine.hpp"
#include "remapsim/workload.hpp"

namespace {

using namespace remapsim;

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  bool explain_translate = false;
  std::optional<std::uint64_t> affinity_window;
};

ExperimentConfig load(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args.config_path);
  if (args.seed) cfg.options.seed = *args.seed;
  if (!args.out_path.empty()) cfg.output = args.out_path;
  return cfg;
}

std::string output_or(const ExperimentConfig& cfg, const char* fallback) {
  return cfg.output.empty() ? fallback : cfg.output;
}

void print_hex(std::ostream& out, std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%" PRIx64, v);
  out << buf;
}

void explain_translation(const ExperimentConfig& cfg, const Trace& trace) {
  constexpr std::uint64_t kMaxExplained = 10000;
  RegionMap rm = build_region_map(cfg.layout, cfg.plan, cfg.region);
  std::uint64_t shown = 0;
  for (const auto& op : trace) {
    if (shown++ >= kMaxExplained) {
      std::cout << "# translation dump truncated at " << kMaxExplained
                << " ops\n";
      break;
    }
    std::cout << "op " << op.op_index << ": "
              << (op.kind == AccessKind::read ? 'R' : 'W') << " ";
    print_hex(std::cout, op.addr);
    std::cout << " +" << op.size << " ->";
    auto outs = translate(rm, cfg.layout, op);
    if (outs.empty()) std::cout << " (padding only, dropped)";
    for (std::size_t i = 0; i < outs.size(); ++i) {
      std::cout << (i ? ", " : " ")
                << (outs[i].kind == AccessKind::read ? 'R' : 'W') << " ";
      print_hex(std::cout, outs[i].addr);
      std::cout << " +" << outs[i].size;
    }
    std::cout << "\n";
  }
}

void print_summary(const ExperimentConfig& cfg, const SimReport& r) {
  std::cout << "plan ";
  print_hex(std::cout, r.plan_bitmask);
  std::cout << " remapped={";
  for (std::size_t i = 0; i < r.remapped_members.size(); ++i)
    std::cout << (i ? "," : "") << r.remapped_members[i];
  std::cout << "}\n";
  std::cout << "  total_cycles   " << r.total_cycles << "\n";
  std::cout << "  ops_completed  " << r.ops_completed
            << "  (logical trace ops, pre-split)\n";
  for (std::size_t l = 0; l < r.level_hits.size(); ++l)
    std::cout << "  " << level_name(static_cast<std::uint32_t>(l),
                                    r.level_hits.size())
              << " hits/misses  " << r.level_hits[l] << "/"
              << r.level_misses[l] << "\n";
  std::cout << "  memory fetches " << r.mem_accesses << "\n";
  if (cfg.dram.approx)
    std::cout << "  bit flips      " << r.flips << " (over " << r.approx_bits
              << " approximate-row bits)\n";
  std::cout << "  normalized_ops " << r.normalized_ops << "\n";
}

int cmd_simulate(const CommonArgs& args) {
  ExperimentConfig cfg = load(args);
  Trace trace = generate(cfg.workload, cfg.layout, cfg.region,
                         cfg.options.seed);

  if (args.explain_translate) explain_translation(cfg, trace);

  SimReport report = run(trace, cfg.layout, cfg.plan, cfg.region,
                         cfg.hierarchy, cfg.dram, cfg.options);
  std::vector<SimReport> pair{report};
  if (report.plan_bitmask != 0) {
    pair.push_back(run(trace, cfg.layout,
                       RemapPlan::identity(cfg.layout.n_members()), cfg.region,
                       cfg.hierarchy, cfg.dram, cfg.options));
  }
  apply_normalization(pair, cfg.options.mode);
  report = pair.front();

  write_reports_csv_file(output_or(cfg, "report.csv"), {report},
                         cfg.hierarchy.levels.size(), false);
  print_summary(cfg, report);

  if (args.affinity_window) {
    AffinityReport aff =
        affinity(trace, cfg.layout, cfg.region, *args.affinity_window);
    std::cout << "member affinity (window " << *args.affinity_window << "):\n";
    write_affinity_csv(std::cout, aff);
  }
  std::cout << "wrote " << output_or(cfg, "report.csv") << "\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  ExperimentConfig cfg = load(args);
  if (cfg.layout.n_members() > 20)
    throw ConfigError("layout.members",
                      "sweeping " + std::to_string(cfg.layout.n_members()) +
                          " members would take 2^" +
                          std::to_string(cfg.layout.n_members() - 1) +
                          " simulations; the limit is 20");
  Trace trace = generate(cfg.workload, cfg.layout, cfg.region,
                         cfg.options.seed);

  auto reports = sweep(trace, cfg.layout, cfg.region, cfg.hierarchy, cfg.dram,
                       cfg.options, args.jobs);
  write_reports_csv_file(output_or(cfg, "report.csv"), reports,
                         cfg.hierarchy.levels.size(), true);

  double mean = 0.0;
  for (const auto& r : reports) mean += r.normalized_ops;
  mean /= static_cast<double>(reports.size());
  std::cout << reports.size() << " conversion patterns simulated\n";
  std::cout << "  worst normalized_ops " << reports.front().normalized_ops
            << " (plan ";
  print_hex(std::cout, reports.front().plan_bitmask);
  std::cout << ")\n";
  std::cout << "  best  normalized_ops " << reports.back().normalized_ops
            << " (plan ";
  print_hex(std::cout, reports.back().plan_bitmask);
  std::cout << ")\n";
  std::cout << "  mean  normalized_ops " << mean << "\n";
  std::cout << "wrote " << output_or(cfg, "report.csv") << "\n";
  return 0;
}

int cmd_rowmap(const CommonArgs& args) {
  ExperimentConfig cfg = load(args);
  RegionMap rm = build_region_map(cfg.layout, cfg.plan, cfg.region);
  RowClassification cls = classify_rows(rm, cfg.layout, cfg.dram.geometry);
  double gap = gap_metric(cls, rm, cfg.layout);

  std::cout << "row size " << cls.row_size() << " bytes\n";
  std::cout << "  critical-only    " << cls.count(RowTag::critical_only)
            << " rows\n";
  std::cout << "  noncritical-only " << cls.count(RowTag::noncritical_only)
            << " rows\n";
  std::cout << "  mixed            " << cls.count(RowTag::mixed) << " rows\n";
  std::cout << "gap_metric " << gap
            << "  (fraction of non-critical bytes in approximable rows)\n";

  bool has_noncritical = false;
  for (const auto& m : cfg.layout.members())
    has_noncritical = has_noncritical || !m.critical;
  if (!has_noncritical)
    std::cout << "warning: layout has no non-critical members; "
                 "gap_metric of 1.0 is vacuous\n";

  if (!cfg.output.empty() || !args.out_path.empty()) {
    std::string path = output_or(cfg, "rowmap.csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "row,tag\n";
    for (const auto& [row, tag] : cls.tags()) {
      const char* name = tag == RowTag::critical_only      ? "critical-only"
                         : tag == RowTag::noncritical_only ? "noncritical-only"
                                                           : "mixed";
      out << row << "," << name << "\n";
    }
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int cmd_gen_trace(const CommonArgs& args) {
  ExperimentConfig cfg = load(args);
  if (cfg.output.empty())
    throw ConfigError("output", "gen-trace needs --out or an output path");
  Trace trace = generate(cfg.workload, cfg.layout, cfg.region,
                         cfg.options.seed);
  write_trace(std::filesystem::path(cfg.output), trace);
  std::cout << "wrote " << trace.size() << " ops to " << cfg.output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace-driven cache/DRAM simulator for struct-splitting "
               "memory layouts on approximate memory"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* cmd, bool with_jobs) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--out", args.out_path, "output path (overrides config)");
    cmd->add_option("--seed", args.seed, "RNG seed (overrides config)");
    if (with_jobs)
      cmd->add_option("--jobs", args.jobs, "concurrent sweep workers")
          ->check(CLI::Range(1u, 256u));
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run one remap plan");
  add_common(simulate, true);
  simulate->add_flag("--explain-translate", args.explain_translate,
                     "dump per-op address translation");
  simulate->add_option("--affinity", args.affinity_window,
                       "print member affinity over windows of N ops");

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "run every canonical remap plan");
  add_common(sweep_cmd, true);

  CLI::App* rowmap = app.add_subcommand("rowmap", "classify DRAM rows");
  add_common(rowmap, false);

  CLI::App* gen_trace =
      app.add_subcommand("gen-trace", "write a synthetic trace");
  add_common(gen_trace, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (sweep_cmd->parsed()) return cmd_sweep(args);
    if (rowmap->parsed()) return cmd_rowmap(args);
    if (gen_trace->parsed()) return cmd_gen_trace(args);
  } catch (const remapsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
