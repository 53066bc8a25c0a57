#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <map>

#include "remapsim/dram.hpp"
#include "support/layout_oracle.hpp"

using namespace remapsim;
using remapsim::testing::ByteMapOracle;

namespace {

StructLayout node_layout() {
  return StructLayout::from_members({
      {"id", 4, 0, true},
      {"r", 8, 0, true},
      {"l", 8, 0, true},
      {"score", 8, 0, false},
  });
}

// Brute-force row oracle: classify rows from the per-byte criticality map
// and recompute the gap metric by counting bytes.
struct RowOracle {
  std::map<std::uint64_t, RowTag> tags;
  double gap = 1.0;

  RowOracle(const StructLayout& layout, const RemapPlan& plan,
            const RegionSpec& region, std::uint64_t row_size) {
    ByteMapOracle oracle(layout, plan, region);
    std::map<std::uint64_t, std::pair<bool, bool>> per_row;  // crit, noncrit
    for (const auto& [addr, critical] : oracle.converted_criticality()) {
      auto& f = per_row[addr / row_size];
      if (critical)
        f.first = true;
      else
        f.second = true;
    }
    for (const auto& [row, f] : per_row)
      tags[row] = f.first && f.second ? RowTag::mixed
                  : f.first           ? RowTag::critical_only
                                      : RowTag::noncritical_only;

    std::uint64_t total = 0, good = 0;
    for (const auto& [addr, critical] : oracle.converted_criticality()) {
      if (critical) continue;
      ++total;
      if (tags.at(addr / row_size) == RowTag::noncritical_only) ++good;
    }
    if (total > 0) gap = static_cast<double>(good) / static_cast<double>(total);
  }
};

}  // namespace

TEST_SUITE_BEGIN("dram");

TEST_CASE("row size of a 32 Gb module with 64K rows, 16 banks, 2 ranks") {
  DramGeometry g{32ull << 30, 64 * 1024, 16, 2};
  CHECK(g.row_size_bytes() == 2048);
}

TEST_CASE("row size of a 16 Gb module with 128K rows, 8 banks") {
  DramGeometry g{16ull << 30, 128 * 1024, 8, 1};
  CHECK(g.row_size_bytes() == 2048);
}

TEST_CASE("row size of a degenerate single-row device") {
  DramGeometry g{16 * 1024, 1, 1, 1};
  CHECK(g.row_size_bytes() == 2048);
}

TEST_CASE("row size rejects non-divisible geometry") {
  CHECK_THROWS_AS((DramGeometry{1000, 3, 1, 1}.row_size_bytes()),
                  std::invalid_argument);
  CHECK_THROWS_AS((DramGeometry{0, 1, 1, 1}.row_size_bytes()),
                  std::invalid_argument);
  // 4 bits per row is not a whole byte count.
  CHECK_THROWS_AS((DramGeometry{4, 1, 1, 1}.row_size_bytes()),
                  std::invalid_argument);
}

TEST_CASE("addr_to_row is a linear mapping") {
  DramGeometry g = default_geometry();
  CHECK(addr_to_row(0, g) == 0);
  CHECK(addr_to_row(2048, g) == 1);
  CHECK(addr_to_row(2047, g) == 0);
  CHECK(addr_to_row(0x40000 + 4095, g) == 0x40000 / 2048 + 1);
}

TEST_CASE("row policy validation") {
  RowPolicy nominal;
  nominal.validate();
  RowPolicy bad_nominal{RowMode::nominal, -1.0, 0.0};
  CHECK_THROWS_AS(bad_nominal.validate(), std::invalid_argument);
  RowPolicy bad_rate{RowMode::approximate, 0.0, 1.5};
  CHECK_THROWS_AS(bad_rate.validate(), std::invalid_argument);
}

TEST_CASE("interleaved criticality makes every touched row mixed") {
  auto layout = node_layout();
  CHECK(layout.stride() == 32);  // interleaving period far below the row size
  RegionSpec region{0x40000, 4096, 0xffff0000};  // 128 KB >> 2 KB rows
  auto rm = build_region_map(layout, RemapPlan::identity(4), region);
  auto cls = classify_rows(rm, layout, default_geometry());

  CHECK(cls.tags().size() == 64);  // 128 KB / 2 KB
  CHECK(cls.count(RowTag::mixed) == 64);
  CHECK(cls.count(RowTag::noncritical_only) == 0);
  CHECK(cls.tag(0) == RowTag::untouched);  // outside the region

  CHECK(gap_metric(cls, rm, layout) == 0.0);

  RowOracle oracle(layout, RemapPlan::identity(4), region, 2048);
  CHECK(oracle.gap == 0.0);
  for (const auto& [row, tag] : oracle.tags) CHECK(cls.tag(row) == tag);
}

TEST_CASE("splitting the non-critical member isolates it into its own rows") {
  auto layout = node_layout();
  RegionSpec region{0x40000, 4096, 0xffff0000};  // both bases row-aligned
  auto plan = RemapPlan::from_names(layout, {"score"});
  auto rm = build_region_map(layout, plan, region);
  auto cls = classify_rows(rm, layout, default_geometry());

  // Packed region: id,r,l only -> critical-only rows; score array rows are
  // purely non-critical.
  CHECK(cls.count(RowTag::mixed) == 0);
  CHECK(cls.count(RowTag::noncritical_only) == 16);  // 4096*8 B / 2 KB
  CHECK(cls.count(RowTag::critical_only) == 48);     // 4096*24 B / 2 KB

  CHECK(gap_metric(cls, rm, layout) == 1.0);

  RowOracle oracle(layout, plan, region, 2048);
  CHECK(oracle.gap == 1.0);
  for (const auto& [row, tag] : oracle.tags) CHECK(cls.tag(row) == tag);
}

TEST_CASE("row classification matches the byte oracle off row boundaries") {
  auto layout = node_layout();
  // Region deliberately not row-aligned and not a whole number of rows.
  RegionSpec region{0x40000 + 512, 300, 0xffff0040};
  for (const auto& plan : enumerate_plans(4)) {
    auto rm = build_region_map(layout, plan, region);
    auto cls = classify_rows(rm, layout, default_geometry());
    RowOracle oracle(layout, plan, region, 2048);
    CHECK(cls.tags().size() == oracle.tags.size());
    for (const auto& [row, tag] : oracle.tags) CHECK(cls.tag(row) == tag);
    CHECK(gap_metric(cls, rm, layout) ==
          doctest::Approx(oracle.gap).epsilon(1e-12));
  }
}

TEST_CASE("row tags depend only on which criticalities land in the row") {
  // Reversing member criticality patterns that cover the same bytes the
  // same way must classify identically; tags are order-independent.
  auto layout = node_layout();
  RegionSpec region{0x40000, 512, 0xffff0000};
  auto plan = RemapPlan::from_names(layout, {"score", "l"});
  auto rm = build_region_map(layout, plan, region);
  auto cls = classify_rows(rm, layout, default_geometry());

  // Same classification computed element-by-element in reverse order via
  // the oracle already matches; here check the tag is stable across calls.
  auto again = classify_rows(rm, layout, default_geometry());
  CHECK(cls.tags() == again.tags());
  // l is critical and remapped: its array rows must be critical-only.
  bool saw_l_rows = false;
  for (const auto& [row, tag] : cls.tags()) {
    std::uint64_t row_base = row * 2048;
    if (row_base >= rm.array_base[2] && row_base < rm.array_end(2)) {
      saw_l_rows = true;
      CHECK(tag == RowTag::critical_only);
    }
  }
  CHECK(saw_l_rows);
}

TEST_CASE("all-critical layouts have a vacuous gap of 1.0") {
  auto layout = StructLayout::from_members({
      {"a", 8, 0, true},
      {"b", 8, 0, true},
  });
  RegionSpec region{0x40000, 1024, 0xffff0000};
  auto rm = build_region_map(layout, RemapPlan::identity(2), region);
  auto cls = classify_rows(rm, layout, default_geometry());
  CHECK(cls.count(RowTag::noncritical_only) == 0);
  CHECK(gap_metric(cls, rm, layout) == 1.0);
}

TEST_CASE("assign_policies marks exactly the noncritical-only rows") {
  RowPolicy approx{RowMode::approximate, -20.0, 1e-4};

  std::map<std::uint64_t, RowTag> tags{
      {10, RowTag::mixed},
      {11, RowTag::noncritical_only},
      {12, RowTag::critical_only},
      {13, RowTag::noncritical_only},
  };
  auto table = assign_policies(RowClassification(2048, tags), approx);
  CHECK(table.approx_row_count() == 2);
  CHECK(table.row_is_approx(11));
  CHECK(table.row_is_approx(13));
  CHECK(!table.row_is_approx(10));  // mixed rows must stay nominal
  CHECK(!table.row_is_approx(12));
  CHECK(!table.row_is_approx(9999));  // untouched rows stay nominal
  CHECK(table.policy_for_row(11).latency_delta_ns == -20.0);
  CHECK(table.policy_for_row(10).mode == RowMode::nominal);
  CHECK(table.policy_for_addr(11 * 2048 + 7).mode == RowMode::approximate);

  // All-mixed classification: nothing approximate.
  std::map<std::uint64_t, RowTag> mixed{{0, RowTag::mixed}, {1, RowTag::mixed}};
  CHECK(!assign_policies(RowClassification(2048, mixed), approx)
             .has_approx_rows());

  // Empty classification: empty table.
  CHECK(!assign_policies(RowClassification(2048, {}), approx)
             .has_approx_rows());

  RowPolicy nominal;
  CHECK_THROWS_AS(assign_policies(RowClassification(2048, tags), nominal),
                  std::invalid_argument);
}

TEST_CASE("error injection: rate 0 never flips") {
  RowPolicy approx{RowMode::approximate, 0.0, 0.0};
  auto table = assign_policies(
      RowClassification(2048, {{0, RowTag::noncritical_only}}), approx);
  ErrorInjector inj(1234);
  for (std::uint64_t i = 0; i < 1000; ++i)
    inj.inject({i, AccessKind::read, (i * 8) % 2048, 8}, table);
  CHECK(inj.log().total_flips == 0);
  CHECK(inj.log().bits_tested == 64000);
}

TEST_CASE("error injection: rate 1 flips all 64 bits of an 8-byte access") {
  RowPolicy approx{RowMode::approximate, 0.0, 1.0};
  auto table = assign_policies(
      RowClassification(2048, {{0, RowTag::noncritical_only}}), approx);
  ErrorInjector inj(1);
  inj.inject({0, AccessKind::read, 64, 8}, table);
  CHECK(inj.log().total_flips == 64);
  CHECK(inj.log().events.size() == 64);
}

TEST_CASE("error injection: nominal rows never flip") {
  RowPolicy approx{RowMode::approximate, 0.0, 1.0};
  auto table = assign_policies(
      RowClassification(2048, {{0, RowTag::noncritical_only}}), approx);
  ErrorInjector inj(7);
  inj.inject({0, AccessKind::read, 5 * 2048, 8}, table);  // row 5: nominal
  CHECK(inj.log().total_flips == 0);
  CHECK(inj.log().bits_tested == 0);
}

TEST_CASE("error injection: flip counts follow the binomial statistics") {
  // n = 10^6 bits at p = 10^-4: mean 100, sigma = sqrt(n*p*(1-p)) ~ 10.
  const double p = 1e-4;
  const std::uint64_t n_bits = 1'000'000;
  const double mean = static_cast<double>(n_bits) * p;
  const double sigma = std::sqrt(static_cast<double>(n_bits) * p * (1 - p));

  RowPolicy approx{RowMode::approximate, 0.0, p};
  std::map<std::uint64_t, RowTag> tags;
  for (std::uint64_t r = 0; r < 64; ++r) tags[r] = RowTag::noncritical_only;
  auto table = assign_policies(RowClassification(2048, tags), approx);

  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    ErrorInjector inj(seed);
    for (std::uint64_t i = 0; i < n_bits / 64; ++i)
      inj.inject({i, AccessKind::read, (i * 8) % (64 * 2048), 8}, table);
    CHECK(inj.log().bits_tested == n_bits);
    double flips = static_cast<double>(inj.log().total_flips);
    CHECK(std::abs(flips - mean) <= 5 * sigma);
  }
}

TEST_CASE("error injection is reproducible from the seed") {
  RowPolicy approx{RowMode::approximate, 0.0, 0.01};
  std::map<std::uint64_t, RowTag> tags;
  for (std::uint64_t r = 0; r < 8; ++r) tags[r] = RowTag::noncritical_only;
  auto table = assign_policies(RowClassification(2048, tags), approx);

  auto run_once = [&](std::uint64_t seed) {
    ErrorInjector inj(seed);
    for (std::uint64_t i = 0; i < 2000; ++i)
      inj.inject({i, AccessKind::read, (i * 16) % (8 * 2048), 8}, table);
    return inj.log();
  };
  auto a = run_once(99);
  auto b = run_once(99);
  CHECK(a.total_flips == b.total_flips);
  CHECK(a.events == b.events);
  CHECK(a.total_flips > 0);  // 2000*64 bits at 1% ~ 1280 expected flips

  auto c = run_once(100);
  CHECK(a.events != c.events);  // different stream per seed
}

TEST_SUITE_END();
