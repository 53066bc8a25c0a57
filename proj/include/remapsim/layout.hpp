#pragma once

// C-style struct layouts, remap plans and the address translation that
// reproduces the memory layout an AoS -> SoA conversion would generate.
//
// A RemapPlan selects which struct members are pulled out into distinct
// per-member arrays.  The surviving members are packed in place at the
// original base address, as if the remapped members never existed.  The
// translate() routine rewrites addresses inside the registered region
// accordingly; addresses outside any registered region pass through
// unchanged.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "remapsim/access.hpp"
#include "remapsim/bits.hpp"

namespace remapsim {

inline constexpr std::uint64_t kCacheLineBytes = 64;

// Natural alignment rule: size rounded up to the next power of two, capped
// at 8 bytes.  Matches what common C ABIs do for scalar members.
std::uint64_t natural_align(std::uint64_t size);

struct MemberSpec {
  std::string name;
  std::uint64_t size = 0;
  std::uint64_t align = 0;  // 0 = derive via natural_align(size)
  bool critical = false;
};

struct OffsetsResult {
  std::vector<std::uint64_t> offsets;
  std::uint64_t stride = 0;
};

// Lays members out with C natural-alignment rules: each member at the next
// offset aligned to its alignment, struct padded to the max member alignment.
// Throws std::invalid_argument on an empty member list or invalid specs.
OffsetsResult compute_offsets(const std::vector<MemberSpec>& members);

class StructLayout {
 public:
  StructLayout() = default;

  // Validates the member list (unique names, size >= 1, power-of-two
  // alignment),
  // resolves default alignments and computes offsets/stride.
  static StructLayout from_members(std::vector<MemberSpec> members);

  std::size_t n_members() const { return members_.size(); }
  const std::vector<MemberSpec>& members() const { return members_; }
  const MemberSpec& member(std::size_t i) const { return members_[i]; }
  const std::vector<std::uint64_t>& offsets() const { return offsets_; }
  std::uint64_t offset(std::size_t i) const { return offsets_[i]; }
  std::uint64_t stride() const { return stride_; }
  std::uint64_t max_align() const { return max_align_; }

  std::optional<std::size_t> index_of(const std::string& name) const;

  // Index of the member whose [offset, offset+size) contains the given
  // intra-element offset, or nullopt when it falls into padding.
  std::optional<std::size_t> member_at(std::uint64_t offset_in_elem) const;

  // First member offset strictly greater than the given intra-element
  // offset; stride when there is none (i.e. trailing padding).
  std::uint64_t next_member_boundary(std::uint64_t offset_in_elem) const;

 private:
  std::vector<MemberSpec> members_;
  std::vector<std::uint64_t> offsets_;
  std::uint64_t stride_ = 0;
  std::uint64_t max_align_ = 1;
};

// Per-member remap flags.  Remapping a set of members produces the same
// member grouping as remapping its complement, so plans are kept in a
// canonical form with flags[0] == false: member 0 always stays packed.
class RemapPlan {
 public:
  RemapPlan() = default;
  explicit RemapPlan(std::vector<bool> flags) : flags_(std::move(flags)) {}

  static RemapPlan identity(std::size_t n_members);
  // Throws std::invalid_argument naming the first unknown member.
  static RemapPlan from_names(const StructLayout& layout,
                              const std::vector<std::string>& names);

  std::size_t size() const { return flags_.size(); }
  bool remapped(std::size_t i) const { return flags_[i]; }
  const std::vector<bool>& flags() const { return flags_; }

  bool is_canonical() const { return flags_.empty() || !flags_[0]; }
  RemapPlan canonicalized() const;  // flips all flags when flags[0] is set
  bool is_identity() const;         // canonical form has no flag set

  // Bit i set = member i remapped (of the canonical form).
  std::uint64_t bitmask() const;

  std::vector<std::string> remapped_names(const StructLayout& layout) const;

  bool operator==(const RemapPlan&) const = default;

 private:
  std::vector<bool> flags_;
};

// All canonical plans for an n-member struct: exactly 2^(n-1), identity
// first, ordered by bitmask.  n outside [1, 20] is rejected to keep the
// sweep explosion bounded.
std::vector<RemapPlan> enumerate_plans(std::size_t n_members);

struct RegionSpec {
  std::uint64_t base = 0x40000;
  std::uint64_t elem_count = 0;
  std::uint64_t array_alloc_base = 0xffff0000;
};

// Concrete address geometry of one region after pseudo-conversion.
struct RegionMap {
  static constexpr std::uint64_t kNoAddr = ~std::uint64_t{0};

  std::uint64_t orig_base = 0;
  std::uint64_t elem_count = 0;
  std::uint64_t orig_stride = 0;
  std::uint64_t packed_base = 0;    // == orig_base (in-place packing)
  std::uint64_t packed_stride = 0;  // over surviving members
  std::vector<std::uint64_t> packed_offset;      // kNoAddr where remapped
  std::vector<std::uint64_t> array_base;         // kNoAddr where packed
  std::vector<std::uint64_t> array_elem_stride;  // 0 where packed
  std::vector<bool> remapped;                    // canonical plan flags

  std::uint64_t orig_end() const { return orig_base + elem_count * orig_stride; }
  std::uint64_t packed_end() const {
    return packed_base + elem_count * packed_stride;
  }
  std::uint64_t array_end(std::size_t m) const {
    return array_base[m] + elem_count * array_elem_stride[m];
  }
  bool contains_orig(std::uint64_t addr) const {
    return addr >= orig_base && addr < orig_end();
  }

  bool operator==(const RegionMap&) const = default;
};

// Builds the converted geometry for a plan (canonicalized first).  Remapped
// members get distinct arrays carved sequentially from array_alloc_base,
// each aligned to the cache line size so no array shares a line with
// another sub-region.  Throws std::invalid_argument when elem_count is 0,
// the plan length does not match, or an array would overlap the original
// region.
RegionMap build_region_map(const StructLayout& layout, const RemapPlan& plan,
                           const RegionSpec& region);

// Rewrites one access into the converted layout.  Splits at member
// boundaries; padding bytes carry no data and are dropped; contiguous
// pieces are re-merged, so an access within one member maps to exactly one
// access and the identity plan reproduces the input on member bytes.
// Accesses starting outside the region pass through unchanged.
std::vector<MemoryAccess> translate(const RegionMap& rm,
                                    const StructLayout& layout,
                                    const MemoryAccess& access);

struct LogicalCoord {
  std::uint64_t element = 0;
  std::size_t member_index = 0;
  std::uint64_t offset_in_member = 0;

  bool operator==(const LogicalCoord&) const = default;
};

// Maps a converted address back to (element, member, offset).  Returns
// nullopt when the address lies in no sub-region or on a padding byte.
std::optional<LogicalCoord> inverse_translate(const RegionMap& rm,
                                              const StructLayout& layout,
                                              std::uint64_t converted_addr);

}  // namespace remapsim
