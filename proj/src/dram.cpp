#include "remapsim/dram.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace remapsim {

std::uint64_t DramGeometry::row_size_bytes() const {
  std::uint64_t denom = rows_per_bank * banks * ranks;
  if (capacity_bits == 0 || denom == 0)
    throw std::invalid_argument("dram geometry has a zero dimension");
  if (capacity_bits % denom != 0)
    throw std::invalid_argument(
        "dram capacity not divisible by rows * banks * ranks");
  std::uint64_t row_bits = capacity_bits / denom;
  if (row_bits % 8 != 0)
    throw std::invalid_argument("dram row size is not a whole byte count");
  return row_bits / 8;
}

DramGeometry default_geometry() {
  return {32ull << 30, 64 * 1024, 16, 2};
}

std::uint64_t addr_to_row(std::uint64_t addr, const DramGeometry& g) {
  return addr / g.row_size_bytes();
}

void RowPolicy::validate() const {
  if (bit_error_rate < 0.0 || bit_error_rate > 1.0)
    throw std::invalid_argument("bit_error_rate must be in [0, 1]");
  if (mode == RowMode::nominal &&
      (latency_delta_ns != 0.0 || bit_error_rate != 0.0))
    throw std::invalid_argument(
        "nominal row policy must have zero delta and zero error rate");
}

RowTag RowClassification::tag(std::uint64_t row) const {
  auto it = tags_.find(row);
  return it == tags_.end() ? RowTag::untouched : it->second;
}

std::uint64_t RowClassification::count(RowTag t) const {
  std::uint64_t n = 0;
  for (const auto& [row, tag] : tags_)
    if (tag == t) ++n;
  return n;
}

namespace {

constexpr std::uint8_t kHasCritical = 1;
constexpr std::uint8_t kHasNonCritical = 2;

// Applies fn(row, bytes_in_row) to every row overlapped by [addr, addr+len).
template <typename Fn>
void for_each_row_span(std::uint64_t addr, std::uint64_t len,
                       std::uint64_t row_size, Fn&& fn) {
  std::uint64_t p = addr;
  const std::uint64_t end = addr + len;
  while (p < end) {
    std::uint64_t row = p / row_size;
    std::uint64_t row_end = (row + 1) * row_size;
    std::uint64_t n = std::min(end, row_end) - p;
    fn(row, n);
    p += n;
  }
}

// Converted byte interval of one (element, member) pair.
std::pair<std::uint64_t, std::uint64_t> member_span(const RegionMap& rm,
                                                    const StructLayout& layout,
                                                    std::uint64_t elem,
                                                    std::size_t m) {
  std::uint64_t addr =
      rm.remapped[m]
          ? rm.array_base[m] + elem * rm.array_elem_stride[m]
          : rm.packed_base + elem * rm.packed_stride + rm.packed_offset[m];
  return {addr, layout.member(m).size};
}

}  // namespace

RowClassification classify_rows(const RegionMap& rm, const StructLayout& layout,
                                const DramGeometry& g) {
  const std::uint64_t row_size = g.row_size_bytes();
  std::unordered_map<std::uint64_t, std::uint8_t> flags;

  for (std::uint64_t e = 0; e < rm.elem_count; ++e) {
    for (std::size_t m = 0; m < layout.n_members(); ++m) {
      auto [addr, len] = member_span(rm, layout, e, m);
      std::uint8_t bit =
          layout.member(m).critical ? kHasCritical : kHasNonCritical;
      for_each_row_span(addr, len, row_size,
                        [&](std::uint64_t row, std::uint64_t) {
                          flags[row] |= bit;
                        });
    }
  }

  std::map<std::uint64_t, RowTag> tags;
  for (const auto& [row, f] : flags) {
    RowTag t = f == kHasCritical      ? RowTag::critical_only
               : f == kHasNonCritical ? RowTag::noncritical_only
                                      : RowTag::mixed;
    tags.emplace(row, t);
  }
  return RowClassification(row_size, std::move(tags));
}

double gap_metric(const RowClassification& cls, const RegionMap& rm,
                  const StructLayout& layout) {
  std::uint64_t total = 0;
  std::uint64_t in_approx_rows = 0;

  for (std::size_t m = 0; m < layout.n_members(); ++m) {
    if (layout.member(m).critical) continue;
    total += rm.elem_count * layout.member(m).size;
    for (std::uint64_t e = 0; e < rm.elem_count; ++e) {
      auto [addr, len] = member_span(rm, layout, e, m);
      for_each_row_span(addr, len, cls.row_size(),
                        [&](std::uint64_t row, std::uint64_t n) {
                          if (cls.tag(row) == RowTag::noncritical_only)
                            in_approx_rows += n;
                        });
    }
  }

  if (total == 0) return 1.0;  // vacuous: nothing to approximate
  return static_cast<double>(in_approx_rows) / static_cast<double>(total);
}

RowPolicyTable::RowPolicyTable(std::uint64_t row_size, RowPolicy approx,
                               std::vector<std::uint64_t> approx_rows)
    : row_size_(row_size),
      approx_(approx),
      approx_rows_(std::move(approx_rows)) {
  std::sort(approx_rows_.begin(), approx_rows_.end());
}

bool RowPolicyTable::row_is_approx(std::uint64_t row) const {
  return std::binary_search(approx_rows_.begin(), approx_rows_.end(), row);
}

const RowPolicy& RowPolicyTable::policy_for_row(std::uint64_t row) const {
  return row_is_approx(row) ? approx_ : nominal_;
}

const RowPolicy& RowPolicyTable::policy_for_addr(std::uint64_t addr) const {
  return policy_for_row(addr / row_size_);
}

RowPolicyTable assign_policies(const RowClassification& cls,
                               const RowPolicy& approx) {
  if (approx.mode != RowMode::approximate)
    throw std::invalid_argument("assign_policies needs an approximate policy");
  approx.validate();

  std::vector<std::uint64_t> rows;
  for (const auto& [row, tag] : cls.tags())
    if (tag == RowTag::noncritical_only) rows.push_back(row);
  return RowPolicyTable(cls.row_size(), approx, std::move(rows));
}

void FlipLog::record(std::uint64_t op_index, std::uint64_t addr,
                     std::uint32_t bit) {
  ++total_flips;
  if (events.size() < kMaxEvents) events.push_back({op_index, addr, bit});
}

ErrorInjector::ErrorInjector(std::uint64_t seed) : rng_(seed) {
  log_.seed = seed;
}

double ErrorInjector::next_uniform() {
  // 53 uniform mantissa bits; identical across platforms, unlike the
  // distribution adaptors.
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

void ErrorInjector::inject(const MemoryAccess& access,
                           const RowPolicyTable& table) {
  if (!table.has_approx_rows()) return;

  const std::uint64_t row_size = table.row_size();
  std::uint64_t row = access.addr / row_size;
  const RowPolicy* policy = &table.policy_for_row(row);

  for (std::uint32_t i = 0; i < access.size; ++i) {
    std::uint64_t byte_addr = access.addr + i;
    std::uint64_t r = byte_addr / row_size;
    if (r != row) {
      row = r;
      policy = &table.policy_for_row(row);
    }
    if (policy->mode != RowMode::approximate) continue;
    log_.bits_tested += 8;
    if (policy->bit_error_rate <= 0.0) continue;
    for (std::uint32_t bit = 0; bit < 8; ++bit)
      if (next_uniform() < policy->bit_error_rate)
        log_.record(access.op_index, byte_addr, bit);
  }
}

ErrorInjector::Snapshot ErrorInjector::snapshot() const {
  return {log_.total_flips, log_.bits_tested, log_.events.size()};
}

void ErrorInjector::restore(const Snapshot& s) {
  log_.total_flips = s.total_flips;
  log_.bits_tested = s.bits_tested;
  log_.events.resize(s.n_events);
}

}  // namespace remapsim
