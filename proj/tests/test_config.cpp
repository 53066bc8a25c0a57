#include <doctest.h>

#include "remapsim/config.hpp"

using namespace remapsim;

namespace {

const char* kFullConfig = R"({
  "layout": {
    "members": [
      {"name": "id", "size": 4, "critical": true},
      {"name": "r", "size": 8, "critical": true},
      {"name": "l", "size": 8, "critical": true},
      {"name": "score", "size": 8, "critical": false}
    ]
  },
  "region": {"base": "0x40000", "elem_count": 1024,
             "array_alloc_base": "0xffff0000"},
  "plan": ["score"],
  "workload": {"kind": "pointer_chase", "steps": 1000},
  "cache": {
    "levels": [
      {"capacity": 32768, "associativity": 2, "miss_latency_cycles": 2},
      {"capacity": 2097152, "associativity": 8, "miss_latency_cycles": 20}
    ],
    "mem_ctrl_latency_ns": 75.0,
    "cpu_freq_ghz": 3.0
  },
  "dram": {
    "capacity_gbit": 32, "rows": 65536, "banks": 16, "ranks": 2,
    "approx": {"latency_delta_ns": -20.0, "bit_error_rate": 0.0001}
  },
  "mode": {"kind": "fixed_budget", "budget_cycles": 1000000},
  "seed": 7,
  "output": "out.csv"
})";

std::string config_path_of(const ConfigError& e) { return e.path(); }

template <typename Fn>
std::string expect_config_error(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return config_path_of(e);
  }
  FAIL("expected a ConfigError");
  return {};
}

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("a full config parses into the expected structures") {
  auto cfg = parse_config(kFullConfig);
  CHECK(cfg.layout.n_members() == 4);
  CHECK(cfg.layout.stride() == 32);
  CHECK(cfg.region.base == 0x40000);
  CHECK(cfg.region.elem_count == 1024);
  CHECK(cfg.region.array_alloc_base == 0xffff0000);
  CHECK(cfg.plan.bitmask() == 0b1000);
  CHECK(cfg.workload.kind == WorkloadSpec::Kind::pointer_chase);
  CHECK(cfg.workload.steps == 1000);
  CHECK(cfg.hierarchy.levels.size() == 2);
  CHECK(cfg.hierarchy.levels[0].capacity_bytes == 32768);
  CHECK(cfg.dram.geometry.row_size_bytes() == 2048);
  REQUIRE(cfg.dram.approx.has_value());
  CHECK(cfg.dram.approx->latency_delta_ns == -20.0);
  CHECK(cfg.dram.approx->bit_error_rate == 0.0001);
  CHECK(cfg.options.mode == RunMode::fixed_budget);
  CHECK(cfg.options.budget_cycles == 1000000);
  CHECK(cfg.options.seed == 7);
  CHECK(cfg.output == "out.csv");
}

TEST_CASE("omitted sections fall back to the default machine") {
  auto cfg = parse_config(R"({
    "layout": {"members": [{"name": "x", "size": 8, "critical": false}]},
    "region": {"elem_count": 4},
    "workload": {"kind": "seq_scan"}
  })");
  CHECK(cfg.hierarchy.levels.size() == 2);
  CHECK(cfg.hierarchy.levels[0].capacity_bytes == 32 * 1024);
  CHECK(cfg.hierarchy.levels[1].capacity_bytes == 2 * 1024 * 1024);
  CHECK(cfg.hierarchy.mem_latency_cycles() == 225);
  CHECK(cfg.dram.geometry.row_size_bytes() == 2048);
  CHECK(!cfg.dram.approx.has_value());
  CHECK(cfg.plan.is_identity());
  CHECK(cfg.options.mode == RunMode::fixed_trace);
  CHECK(cfg.options.budget_cycles == 100'000'000);
  CHECK(cfg.options.seed == 1);
  CHECK(cfg.region.array_alloc_base == 0xffff0000);
}

TEST_CASE("errors carry the offending key path") {
  CHECK(expect_config_error([] { parse_config("{}"); }) == "layout");
  CHECK(expect_config_error([] { parse_config("not json"); }) == "<document>");

  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "x", "size": 0, "critical": false}]},
            "region": {"elem_count": 4},
            "workload": {"kind": "seq_scan"}})");
        }) == "layout.members[0].size");

  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "x", "size": 8, "critical": false}]},
            "region": {"elem_count": 4},
            "workload": {"kind": "seq_scan"},
            "plan": ["nope"]})");
        }) == "plan[0]");

  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "x", "size": 8, "align": 3, "critical": false}]},
            "region": {"elem_count": 4},
            "workload": {"kind": "seq_scan"}})");
        }) == "layout.members[0].align");

  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "x", "size": 8}]},
            "region": {"elem_count": 4},
            "workload": {"kind": "seq_scan"}})");
        }) == "layout.members[0].critical");

  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "x", "size": 8, "critical": false}]},
            "region": {"elem_count": 4},
            "workload": {"kind": "warp_drive"}})");
        }) == "workload.kind");

  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "x", "size": 8, "critical": false}]},
            "region": {"elem_count": 4, "base": "zzz"},
            "workload": {"kind": "seq_scan"}})");
        }) == "region.base");

  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "x", "size": 8, "critical": false}]},
            "region": {"elem_count": 4},
            "workload": {"kind": "seq_scan"},
            "typo_section": 1})");
        }) == "<top>.typo_section");

  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "x", "size": 8, "critical": false}]},
            "region": {"elem_count": 4},
            "workload": {"kind": "seq_scan"},
            "dram": {"approx": {"bit_error_rate": 2.0}}})");
        }) == "dram.approx.bit_error_rate");

  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "x", "size": 8, "critical": false}]},
            "region": {"elem_count": 4},
            "workload": {"kind": "trace_file"}})");
        }) == "workload.path");

  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "x", "size": 8, "critical": false}]},
            "region": {"elem_count": 4},
            "workload": {"kind": "pointer_chase", "steps": 5}})");
        }) == "workload.kind");  // layout lacks score/l/r
}

TEST_CASE("overlapping array allocation is rejected up front") {
  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "a", "size": 8, "critical": false},
            {"name": "b", "size": 8, "critical": false}]},
            "region": {"elem_count": 1024, "base": "0x40000",
                       "array_alloc_base": "0x40400"},
            "workload": {"kind": "seq_scan"}})");
        }) == "region");

  CHECK(expect_config_error([] {
          parse_config(R"({"layout": {"members": [
            {"name": "score", "size": 8, "critical": false},
            {"name": "l", "size": 8, "critical": true},
            {"name": "r", "size": 8, "critical": true}]},
            "region": {"elem_count": 1},
            "workload": {"kind": "pointer_chase", "steps": 5}})");
        }) == "region.elem_count");
}

TEST_CASE("addresses accept both integers and hex strings") {
  auto cfg = parse_config(R"({
    "layout": {"members": [{"name": "x", "size": 8, "critical": false}]},
    "region": {"elem_count": 4, "base": 262144},
    "workload": {"kind": "seq_scan"}
  })");
  CHECK(cfg.region.base == 0x40000);
}

TEST_SUITE_END();
