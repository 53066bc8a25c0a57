#include "remapsim/config.hpp"

#include <fstream>
#include <json.hpp>

namespace remapsim {

namespace {

using nlohmann::json;

void check_known_keys(const json& obj, const std::string& path,
                      std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(path + "." + key, "unknown key");
  }
}

const json* get(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::uint64_t require_u64(const json& v, const std::string& path,
                          std::uint64_t min = 0) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() &&
                                   v.get<std::int64_t>() >= 0))
    throw ConfigError(path, "expected a non-negative integer");
  std::uint64_t n = v.get<std::uint64_t>();
  if (n < min)
    throw ConfigError(path, "must be >= " + std::to_string(min));
  return n;
}

double require_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

bool require_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected a boolean");
  return v.get<bool>();
}

std::string require_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

// Addresses may be JSON integers or hex strings like "0xffff0000".
std::uint64_t require_address(const json& v, const std::string& path) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    try {
      std::size_t pos = 0;
      std::uint64_t addr = std::stoull(s, &pos, 0);
      if (pos != s.size()) throw std::invalid_argument(s);
      return addr;
    } catch (const std::exception&) {
      throw ConfigError(path, "cannot parse address '" + s + "'");
    }
  }
  return require_u64(v, path);
}

std::vector<std::string> require_string_list(const json& v,
                                             const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected a list");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(require_string(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

StructLayout parse_layout(const json& root) {
  const json* layout = get(root, "layout");
  if (!layout) throw ConfigError("layout", "missing section");
  check_known_keys(*layout, "layout", {"members"});
  const json* members = get(*layout, "members");
  if (!members || !members->is_array() || members->empty())
    throw ConfigError("layout.members", "expected a non-empty list");

  std::vector<MemberSpec> specs;
  for (std::size_t i = 0; i < members->size(); ++i) {
    const std::string path = "layout.members[" + std::to_string(i) + "]";
    const json& m = (*members)[i];
    if (!m.is_object()) throw ConfigError(path, "expected an object");
    check_known_keys(m, path, {"name", "size", "align", "critical"});

    MemberSpec spec;
    const json* name = get(m, "name");
    if (!name) throw ConfigError(path + ".name", "missing");
    spec.name = require_string(*name, path + ".name");
    const json* size = get(m, "size");
    if (!size) throw ConfigError(path + ".size", "missing");
    spec.size = require_u64(*size, path + ".size", 1);
    if (const json* align = get(m, "align")) {
      spec.align = require_u64(*align, path + ".align", 1);
      if (!is_pow2(spec.align))
        throw ConfigError(path + ".align", "must be a power of two");
    }
    const json* critical = get(m, "critical");
    if (!critical) throw ConfigError(path + ".critical", "missing");
    spec.critical = require_bool(*critical, path + ".critical");
    specs.push_back(std::move(spec));
  }

  try {
    return StructLayout::from_members(std::move(specs));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("layout.members", e.what());
  }
}

RegionSpec parse_region(const json& root) {
  RegionSpec region;
  const json* r = get(root, "region");
  if (!r) throw ConfigError("region", "missing section");
  check_known_keys(*r, "region", {"base", "elem_count", "array_alloc_base"});
  if (const json* base = get(*r, "base"))
    region.base = require_address(*base, "region.base");
  const json* count = get(*r, "elem_count");
  if (!count) throw ConfigError("region.elem_count", "missing");
  region.elem_count = require_u64(*count, "region.elem_count", 1);
  if (const json* alloc = get(*r, "array_alloc_base"))
    region.array_alloc_base =
        require_address(*alloc, "region.array_alloc_base");
  return region;
}

RemapPlan parse_plan(const json& root, const StructLayout& layout) {
  const json* p = get(root, "plan");
  if (!p) return RemapPlan::identity(layout.n_members());
  auto names = require_string_list(*p, "plan");
  for (std::size_t i = 0; i < names.size(); ++i)
    if (!layout.index_of(names[i]))
      throw ConfigError("plan[" + std::to_string(i) + "]",
                        "unknown member '" + names[i] + "'");
  return RemapPlan::from_names(layout, names);
}

WorkloadSpec parse_workload(const json& root, const StructLayout& layout) {
  const json* w = get(root, "workload");
  if (!w) throw ConfigError("workload", "missing section");
  check_known_keys(*w, "workload", {"kind", "members", "steps", "path"});

  WorkloadSpec spec;
  const json* kind = get(*w, "kind");
  if (!kind) throw ConfigError("workload.kind", "missing");
  const std::string k = require_string(*kind, "workload.kind");
  if (k == "seq_scan") {
    spec.kind = WorkloadSpec::Kind::seq_scan;
  } else if (k == "pointer_chase") {
    spec.kind = WorkloadSpec::Kind::pointer_chase;
  } else if (k == "random") {
    spec.kind = WorkloadSpec::Kind::random;
  } else if (k == "trace_file") {
    spec.kind = WorkloadSpec::Kind::trace_file;
  } else {
    throw ConfigError("workload.kind",
                      "expected seq_scan|pointer_chase|random|trace_file, got '" +
                          k + "'");
  }

  if (const json* members = get(*w, "members")) {
    spec.members = require_string_list(*members, "workload.members");
    for (std::size_t i = 0; i < spec.members.size(); ++i)
      if (!layout.index_of(spec.members[i]))
        throw ConfigError("workload.members[" + std::to_string(i) + "]",
                          "unknown member '" + spec.members[i] + "'");
  }
  if (const json* steps = get(*w, "steps"))
    spec.steps = require_u64(*steps, "workload.steps", 1);
  if (const json* path = get(*w, "path"))
    spec.path = require_string(*path, "workload.path");

  if (spec.kind == WorkloadSpec::Kind::pointer_chase ||
      spec.kind == WorkloadSpec::Kind::random) {
    if (spec.steps == 0) throw ConfigError("workload.steps", "missing");
  }
  if (spec.kind == WorkloadSpec::Kind::pointer_chase) {
    for (const char* needed : {"score", "l", "r"})
      if (!layout.index_of(needed))
        throw ConfigError("workload.kind",
                          std::string("pointer_chase needs a '") + needed +
                              "' member in the layout");
  }
  if (spec.kind == WorkloadSpec::Kind::trace_file && spec.path.empty())
    throw ConfigError("workload.path", "missing");
  return spec;
}

HierarchyConfig parse_cache(const json& root) {
  HierarchyConfig cfg = default_hierarchy();
  const json* c = get(root, "cache");
  if (!c) return cfg;
  check_known_keys(*c, "cache", {"levels", "mem_ctrl_latency_ns", "cpu_freq_ghz"});

  if (const json* levels = get(*c, "levels")) {
    if (!levels->is_array() || levels->empty())
      throw ConfigError("cache.levels", "expected a non-empty list");
    cfg.levels.clear();
    for (std::size_t i = 0; i < levels->size(); ++i) {
      const std::string path = "cache.levels[" + std::to_string(i) + "]";
      const json& l = (*levels)[i];
      if (!l.is_object()) throw ConfigError(path, "expected an object");
      check_known_keys(l, path,
                       {"capacity", "associativity", "line_size",
                        "miss_latency_cycles", "mshrs"});
      CacheLevelConfig level;
      const json* cap = get(l, "capacity");
      if (!cap) throw ConfigError(path + ".capacity", "missing");
      level.capacity_bytes = require_u64(*cap, path + ".capacity", 1);
      const json* assoc = get(l, "associativity");
      if (!assoc) throw ConfigError(path + ".associativity", "missing");
      level.associativity = static_cast<std::uint32_t>(
          require_u64(*assoc, path + ".associativity", 1));
      if (const json* line = get(l, "line_size"))
        level.line_size = require_u64(*line, path + ".line_size", 1);
      const json* lat = get(l, "miss_latency_cycles");
      if (!lat) throw ConfigError(path + ".miss_latency_cycles", "missing");
      level.miss_latency_cycles =
          require_u64(*lat, path + ".miss_latency_cycles");
      if (const json* mshrs = get(l, "mshrs"))
        level.mshrs =
            static_cast<std::uint32_t>(require_u64(*mshrs, path + ".mshrs", 1));
      cfg.levels.push_back(level);
    }
  }
  if (const json* lat = get(*c, "mem_ctrl_latency_ns")) {
    cfg.mem_ctrl_latency_ns = require_number(*lat, "cache.mem_ctrl_latency_ns");
    if (cfg.mem_ctrl_latency_ns < 0)
      throw ConfigError("cache.mem_ctrl_latency_ns", "must be >= 0");
  }
  if (const json* freq = get(*c, "cpu_freq_ghz")) {
    cfg.cpu_freq_ghz = require_number(*freq, "cache.cpu_freq_ghz");
    if (cfg.cpu_freq_ghz <= 0)
      throw ConfigError("cache.cpu_freq_ghz", "must be > 0");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("cache", e.what());
  }
  return cfg;
}

DramConfig parse_dram(const json& root) {
  DramConfig cfg;
  const json* d = get(root, "dram");
  if (!d) return cfg;
  check_known_keys(*d, "dram",
                   {"capacity_gbit", "rows", "banks", "ranks", "approx"});

  if (const json* cap = get(*d, "capacity_gbit"))
    cfg.geometry.capacity_bits =
        require_u64(*cap, "dram.capacity_gbit", 1) << 30;
  if (const json* rows = get(*d, "rows"))
    cfg.geometry.rows_per_bank = require_u64(*rows, "dram.rows", 1);
  if (const json* banks = get(*d, "banks"))
    cfg.geometry.banks =
        static_cast<std::uint32_t>(require_u64(*banks, "dram.banks", 1));
  if (const json* ranks = get(*d, "ranks"))
    cfg.geometry.ranks =
        static_cast<std::uint32_t>(require_u64(*ranks, "dram.ranks", 1));
  try {
    cfg.geometry.row_size_bytes();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("dram", e.what());
  }

  if (const json* approx = get(*d, "approx")) {
    check_known_keys(*approx, "dram.approx",
                     {"latency_delta_ns", "bit_error_rate"});
    RowPolicy policy;
    policy.mode = RowMode::approximate;
    if (const json* delta = get(*approx, "latency_delta_ns"))
      policy.latency_delta_ns =
          require_number(*delta, "dram.approx.latency_delta_ns");
    if (const json* rate = get(*approx, "bit_error_rate")) {
      policy.bit_error_rate =
          require_number(*rate, "dram.approx.bit_error_rate");
      if (policy.bit_error_rate < 0 || policy.bit_error_rate > 1)
        throw ConfigError("dram.approx.bit_error_rate", "must be in [0, 1]");
    }
    cfg.approx = policy;
  }
  return cfg;
}

RunOptions parse_mode(const json& root) {
  RunOptions opts;
  const json* m = get(root, "mode");
  if (m) {
    check_known_keys(*m, "mode", {"kind", "budget_cycles", "warmup_ops"});
    if (const json* kind = get(*m, "kind")) {
      const std::string k = require_string(*kind, "mode.kind");
      if (k == "fixed_trace") {
        opts.mode = RunMode::fixed_trace;
      } else if (k == "fixed_budget") {
        opts.mode = RunMode::fixed_budget;
      } else {
        throw ConfigError("mode.kind",
                          "expected fixed_trace|fixed_budget, got '" + k + "'");
      }
    }
    if (const json* budget = get(*m, "budget_cycles"))
      opts.budget_cycles = require_u64(*budget, "mode.budget_cycles", 1);
    if (const json* warmup = get(*m, "warmup_ops"))
      opts.warmup_ops = require_u64(*warmup, "mode.warmup_ops");
  }
  if (const json* seed = get(root, "seed"))
    opts.seed = require_u64(*seed, "seed");
  return opts;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  if (!root.is_object())
    throw ConfigError("<document>", "top level must be an object");
  check_known_keys(root, "<top>",
                   {"layout", "region", "plan", "workload", "cache", "dram",
                    "mode", "seed", "output"});

  ExperimentConfig cfg;
  cfg.layout = parse_layout(root);
  cfg.region = parse_region(root);
  cfg.plan = parse_plan(root, cfg.layout);
  cfg.workload = parse_workload(root, cfg.layout);
  cfg.hierarchy = parse_cache(root);
  cfg.dram = parse_dram(root);
  cfg.options = parse_mode(root);
  if (const json* out = get(root, "output"))
    cfg.output = require_string(*out, "output");

  if (cfg.workload.kind == WorkloadSpec::Kind::pointer_chase &&
      cfg.region.elem_count < 2)
    throw ConfigError("region.elem_count", "pointer_chase needs >= 2 elements");

  // Catch array/region overlap up front.  The all-but-first plan has the
  // largest array footprint any canonical plan can carve, so if it fits,
  // every plan of a sweep fits.
  try {
    build_region_map(cfg.layout, cfg.plan, cfg.region);
    if (cfg.layout.n_members() > 1) {
      std::vector<bool> widest(cfg.layout.n_members(), true);
      widest[0] = false;
      build_region_map(cfg.layout, RemapPlan(widest), cfg.region);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("region", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("<file>", "cannot open config file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

}  // namespace remapsim
