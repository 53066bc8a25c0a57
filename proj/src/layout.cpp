#include "remapsim/layout.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <stdexcept>

namespace remapsim {

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
    return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

}  // namespace

std::uint64_t natural_align(std::uint64_t size) {
  std::uint64_t a = 1;
  while (a < size && a < 8) a <<= 1;
  return a;
}

OffsetsResult compute_offsets(const std::vector<MemberSpec>& members) {
  if (members.empty())
    throw std::invalid_argument("struct layout has no members");

  OffsetsResult r;
  r.offsets.reserve(members.size());
  std::uint64_t cursor = 0;
  std::uint64_t max_align = 1;
  for (const auto& m : members) {
    if (m.size == 0)
      throw std::invalid_argument("member '" + m.name + "' has size 0");
    std::uint64_t a = m.align == 0 ? natural_align(m.size) : m.align;
    if (!is_pow2(a))
      throw std::invalid_argument("member '" + m.name +
                                  "' alignment is not a power of two");
    cursor = align_up(cursor, a);
    r.offsets.push_back(cursor);
    cursor += m.size;
    max_align = std::max(max_align, a);
  }
  r.stride = align_up(cursor, max_align);
  return r;
}

StructLayout StructLayout::from_members(std::vector<MemberSpec> members) {
  auto computed = compute_offsets(members);

  StructLayout layout;
  for (auto& m : members) {
    if (!valid_identifier(m.name))
      throw std::invalid_argument("member name '" + m.name +
                                  "' is not a valid identifier");
    if (m.align == 0) m.align = natural_align(m.size);
    layout.max_align_ = std::max(layout.max_align_, m.align);
  }
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      if (members[i].name == members[j].name)
        throw std::invalid_argument("duplicate member name '" +
                                    members[i].name + "'");

  layout.members_ = std::move(members);
  layout.offsets_ = std::move(computed.offsets);
  layout.stride_ = computed.stride;
  return layout;
}

std::optional<std::size_t> StructLayout::index_of(
    const std::string& name) const {
  for (std::size_t i = 0; i < members_.size(); ++i)
    if (members_[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> StructLayout::member_at(
    std::uint64_t offset_in_elem) const {
  // offsets_ is strictly increasing: binary-search the candidate member.
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), offset_in_elem);
  if (it == offsets_.begin()) return std::nullopt;
  std::size_t i = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  if (offset_in_elem < offsets_[i] + members_[i].size) return i;
  return std::nullopt;
}

std::uint64_t StructLayout::next_member_boundary(
    std::uint64_t offset_in_elem) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), offset_in_elem);
  if (it == offsets_.end()) return stride_;
  return *it;
}

RemapPlan RemapPlan::identity(std::size_t n_members) {
  return RemapPlan(std::vector<bool>(n_members, false));
}

RemapPlan RemapPlan::from_names(const StructLayout& layout,
                                const std::vector<std::string>& names) {
  std::vector<bool> flags(layout.n_members(), false);
  for (const auto& n : names) {
    auto idx = layout.index_of(n);
    if (!idx)
      throw std::invalid_argument("plan remaps unknown member '" + n + "'");
    flags[*idx] = true;
  }
  return RemapPlan(std::move(flags));
}

RemapPlan RemapPlan::canonicalized() const {
  if (is_canonical()) return *this;
  std::vector<bool> flipped(flags_.size());
  for (std::size_t i = 0; i < flags_.size(); ++i) flipped[i] = !flags_[i];
  return RemapPlan(std::move(flipped));
}

bool RemapPlan::is_identity() const {
  auto c = canonicalized();
  return std::none_of(c.flags_.begin(), c.flags_.end(),
                      [](bool f) { return f; });
}

std::uint64_t RemapPlan::bitmask() const {
  auto c = canonicalized();
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < c.flags_.size(); ++i)
    if (c.flags_[i]) mask |= std::uint64_t{1} << i;
  return mask;
}

std::vector<std::string> RemapPlan::remapped_names(
    const StructLayout& layout) const {
  auto c = canonicalized();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < c.size() && i < layout.n_members(); ++i)
    if (c.remapped(i)) names.push_back(layout.member(i).name);
  return names;
}

std::vector<RemapPlan> enumerate_plans(std::size_t n_members) {
  if (n_members < 1 || n_members > 20)
    throw std::invalid_argument(
        "plan enumeration supports 1..20 members (2^(n-1) patterns); got " +
        std::to_string(n_members));

  std::uint64_t count = std::uint64_t{1} << (n_members - 1);
  std::vector<RemapPlan> plans;
  plans.reserve(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    std::vector<bool> flags(n_members, false);
    for (std::size_t i = 1; i < n_members; ++i)
      flags[i] = (mask >> (i - 1)) & 1;
    plans.emplace_back(std::move(flags));
  }
  return plans;
}

RegionMap build_region_map(const StructLayout& layout, const RemapPlan& plan,
                           const RegionSpec& region) {
  if (plan.size() != layout.n_members())
    throw std::invalid_argument("plan length does not match member count");
  if (region.elem_count == 0)
    throw std::invalid_argument("region elem_count must be >= 1");

  RemapPlan canonical = plan.canonicalized();
  std::size_t n = layout.n_members();

  RegionMap rm;
  rm.orig_base = region.base;
  rm.elem_count = region.elem_count;
  rm.orig_stride = layout.stride();
  rm.packed_base = region.base;
  rm.packed_offset.assign(n, RegionMap::kNoAddr);
  rm.array_base.assign(n, RegionMap::kNoAddr);
  rm.array_elem_stride.assign(n, 0);
  rm.remapped.resize(n);
  for (std::size_t i = 0; i < n; ++i) rm.remapped[i] = canonical.remapped(i);

  // Surviving members close ranks under the same alignment rules.
  std::uint64_t cursor = 0;
  std::uint64_t max_align = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (canonical.remapped(i)) continue;
    const auto& m = layout.member(i);
    cursor = align_up(cursor, m.align);
    rm.packed_offset[i] = cursor;
    cursor += m.size;
    max_align = std::max(max_align, m.align);
  }
  rm.packed_stride = align_up(cursor, max_align);

  // Distinct arrays carved sequentially, each cache-line aligned.
  std::uint64_t alloc = region.array_alloc_base;
  for (std::size_t i = 0; i < n; ++i) {
    if (!canonical.remapped(i)) continue;
    const auto& m = layout.member(i);
    alloc = align_up(alloc, std::max(m.align, kCacheLineBytes));
    rm.array_base[i] = alloc;
    rm.array_elem_stride[i] = align_up(m.size, m.align);
    std::uint64_t bytes = region.elem_count * rm.array_elem_stride[i];
    if (alloc + bytes < alloc)
      throw std::invalid_argument("remapped array overflows address space");
    alloc += bytes;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!canonical.remapped(i)) continue;
    bool disjoint = rm.array_end(i) <= rm.orig_base ||
                    rm.array_base[i] >= rm.orig_end();
    if (!disjoint)
      throw std::invalid_argument("remapped array for member '" +
                                  layout.member(i).name +
                                  "' overlaps the original region");
  }
  return rm;
}

namespace {

// Converted address of one byte at (element, member, offset_in_member).
std::uint64_t converted_byte_addr(const RegionMap& rm, std::size_t m,
                                  std::uint64_t elem, std::uint64_t within) {
  if (rm.remapped[m])
    return rm.array_base[m] + elem * rm.array_elem_stride[m] + within;
  return rm.packed_base + elem * rm.packed_stride + rm.packed_offset[m] +
         within;
}

void emit(std::vector<MemoryAccess>& out, const MemoryAccess& src,
          std::uint64_t addr, std::uint64_t len) {
  if (!out.empty() && out.back().addr + out.back().size == addr) {
    out.back().size += static_cast<std::uint32_t>(len);
    return;
  }
  out.push_back({src.op_index, src.kind, addr, static_cast<std::uint32_t>(len)});
}

}  // namespace

std::vector<MemoryAccess> translate(const RegionMap& rm,
                                    const StructLayout& layout,
                                    const MemoryAccess& access) {
  if (access.size == 0)
    throw std::invalid_argument("cannot translate a zero-size access");
  if (!rm.contains_orig(access.addr)) return {access};

  std::vector<MemoryAccess> out;
  std::uint64_t p = access.addr;
  const std::uint64_t end = access.addr + access.size;

  while (p < end) {
    if (p >= rm.orig_end()) {
      // Tail past the registered region: not remapped data, pass through.
      emit(out, access, p, end - p);
      break;
    }
    std::uint64_t off = p - rm.orig_base;
    std::uint64_t elem = off / rm.orig_stride;
    std::uint64_t rem = off % rm.orig_stride;

    if (auto m = layout.member_at(rem)) {
      std::uint64_t within = rem - layout.offset(*m);
      std::uint64_t member_end = layout.offset(*m) + layout.member(*m).size;
      std::uint64_t len = std::min(end - p, member_end - rem);
      emit(out, access, converted_byte_addr(rm, *m, elem, within), len);
      p += len;
    } else {
      // Padding byte: no logical home in the converted layout.
      std::uint64_t skip = layout.next_member_boundary(rem) - rem;
      p += std::min(end - p, skip);
    }
  }
  return out;
}

std::optional<LogicalCoord> inverse_translate(const RegionMap& rm,
                                              const StructLayout& layout,
                                              std::uint64_t converted_addr) {
  for (std::size_t m = 0; m < layout.n_members(); ++m) {
    if (!rm.remapped[m]) continue;
    if (converted_addr < rm.array_base[m] || converted_addr >= rm.array_end(m))
      continue;
    std::uint64_t off = converted_addr - rm.array_base[m];
    std::uint64_t elem = off / rm.array_elem_stride[m];
    std::uint64_t within = off % rm.array_elem_stride[m];
    if (within >= layout.member(m).size) return std::nullopt;  // array padding
    return LogicalCoord{elem, m, within};
  }

  if (converted_addr >= rm.packed_base && converted_addr < rm.packed_end()) {
    std::uint64_t off = converted_addr - rm.packed_base;
    std::uint64_t elem = off / rm.packed_stride;
    std::uint64_t rem = off % rm.packed_stride;
    for (std::size_t m = 0; m < layout.n_members(); ++m) {
      if (rm.remapped[m]) continue;
      if (rem >= rm.packed_offset[m] &&
          rem < rm.packed_offset[m] + layout.member(m).size)
        return LogicalCoord{elem, m, rem - rm.packed_offset[m]};
    }
    return std::nullopt;  // packed padding
  }
  return std::nullopt;
}

}  // namespace remapsim
