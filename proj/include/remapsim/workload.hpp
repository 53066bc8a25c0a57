#pragma once

// Deterministic synthetic trace generators plus a line-oriented trace file
// format: `<op_index> <R|W> <hex addr> <size>`, one access per line, `#`
// comments.  Generators are pure functions of (spec, seed); the same seed
// always yields a byte-identical trace.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "remapsim/access.hpp"
#include "remapsim/layout.hpp"

namespace remapsim {

struct WorkloadSpec {
  enum class Kind { seq_scan, pointer_chase, random, trace_file };

  Kind kind = Kind::seq_scan;
  std::vector<std::string> members;  // seq_scan/random; empty = all members
  std::uint64_t steps = 0;           // pointer_chase iterations / random ops
  std::string path;                  // trace_file
};

// Per-element reads of the selected members in element order, at original
// AoS addresses.
Trace gen_seq_scan(const StructLayout& layout, std::uint64_t base,
                   std::uint64_t elem_count,
                   const std::vector<std::string>& members);

// Random walk over an array of nodes whose layout must provide `score`,
// `l` and `r` members.  Each step reads the current node's score and then
// one child pointer; the branch direction comes from pre-generated
// uniform scores compared against 0.5, children are pre-wired to uniformly
// random nodes.  The walk is unpredictable but fully reproducible per seed.
Trace gen_pointer_chase(const StructLayout& layout, std::uint64_t base,
                        std::uint64_t node_count, std::uint64_t steps,
                        std::uint64_t seed);

// Uniformly random single-member reads.
Trace gen_random(const StructLayout& layout, std::uint64_t base,
                 std::uint64_t elem_count, std::uint64_t n_ops,
                 std::uint64_t seed,
                 const std::vector<std::string>& members = {});

Trace generate(const WorkloadSpec& spec, const StructLayout& layout,
               const RegionSpec& region, std::uint64_t seed);

// Throws std::runtime_error with the offending line number on malformed
// input.  Round-trips losslessly with write_trace.
Trace read_trace(std::istream& in);
Trace read_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, const Trace& trace);
void write_trace(const std::filesystem::path& path, const Trace& trace);

}  // namespace remapsim
