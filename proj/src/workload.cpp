#include "remapsim/workload.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace remapsim {

namespace {

std::vector<std::size_t> resolve_members(const StructLayout& layout,
                                         const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  if (names.empty()) {
    for (std::size_t i = 0; i < layout.n_members(); ++i) idx.push_back(i);
    return idx;
  }
  for (const auto& n : names) {
    auto i = layout.index_of(n);
    if (!i) throw std::invalid_argument("unknown member '" + n + "'");
    idx.push_back(*i);
  }
  return idx;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Trace gen_seq_scan(const StructLayout& layout, std::uint64_t base,
                   std::uint64_t elem_count,
                   const std::vector<std::string>& members) {
  if (elem_count == 0)
    throw std::invalid_argument("seq_scan needs elem_count >= 1");
  auto idx = resolve_members(layout, members);
  if (idx.empty()) throw std::invalid_argument("seq_scan needs >= 1 member");

  Trace trace;
  trace.reserve(elem_count * idx.size());
  std::uint64_t op = 0;
  for (std::uint64_t e = 0; e < elem_count; ++e)
    for (std::size_t m : idx)
      trace.push_back({op++, AccessKind::read,
                       base + e * layout.stride() + layout.offset(m),
                       static_cast<std::uint32_t>(layout.member(m).size)});
  return trace;
}

Trace gen_pointer_chase(const StructLayout& layout, std::uint64_t base,
                        std::uint64_t node_count, std::uint64_t steps,
                        std::uint64_t seed) {
  if (node_count < 2)
    throw std::invalid_argument("pointer_chase needs node_count >= 2");
  if (steps == 0) throw std::invalid_argument("pointer_chase needs steps >= 1");

  auto need = [&](const char* name) {
    auto i = layout.index_of(name);
    if (!i)
      throw std::invalid_argument(std::string("pointer_chase layout lacks a '") +
                                  name + "' member");
    return *i;
  };
  const std::size_t score = need("score");
  const std::size_t left = need("l");
  const std::size_t right = need("r");

  std::mt19937_64 rng(seed);
  // Pre-generated node state: uniform scores and children wired to
  // uniformly random nodes.
  std::vector<double> score_val(node_count);
  std::vector<std::uint32_t> child_l(node_count);
  std::vector<std::uint32_t> child_r(node_count);
  for (std::uint64_t i = 0; i < node_count; ++i) {
    score_val[i] = uniform01(rng);
    child_l[i] = static_cast<std::uint32_t>(rng() % node_count);
    child_r[i] = static_cast<std::uint32_t>(rng() % node_count);
  }

  // Each step compares the stored score against a fresh threshold drawn
  // from the seeded stream.  A fixed threshold would make the successor a
  // function of the node alone and the walk would collapse onto a cycle of
  // expected length O(sqrt(node_count)); the per-step draw keeps the walk
  // wandering the whole array while staying reproducible.
  Trace trace;
  trace.reserve(2 * steps);
  std::uint64_t op = 0;
  std::uint64_t cur = 0;
  for (std::uint64_t s = 0; s < steps; ++s) {
    std::uint64_t elem_base = base + cur * layout.stride();
    trace.push_back({op++, AccessKind::read, elem_base + layout.offset(score),
                     static_cast<std::uint32_t>(layout.member(score).size)});
    bool go_left = score_val[cur] > uniform01(rng);
    std::size_t child = go_left ? left : right;
    trace.push_back({op++, AccessKind::read, elem_base + layout.offset(child),
                     static_cast<std::uint32_t>(layout.member(child).size)});
    cur = go_left ? child_l[cur] : child_r[cur];
  }
  return trace;
}

Trace gen_random(const StructLayout& layout, std::uint64_t base,
                 std::uint64_t elem_count, std::uint64_t n_ops,
                 std::uint64_t seed, const std::vector<std::string>& members) {
  if (elem_count == 0)
    throw std::invalid_argument("random workload needs elem_count >= 1");
  if (n_ops == 0) throw std::invalid_argument("random workload needs ops >= 1");
  auto idx = resolve_members(layout, members);

  std::mt19937_64 rng(seed);
  Trace trace;
  trace.reserve(n_ops);
  for (std::uint64_t op = 0; op < n_ops; ++op) {
    std::uint64_t e = rng() % elem_count;
    std::size_t m = idx[rng() % idx.size()];
    trace.push_back({op, AccessKind::read,
                     base + e * layout.stride() + layout.offset(m),
                     static_cast<std::uint32_t>(layout.member(m).size)});
  }
  return trace;
}

Trace generate(const WorkloadSpec& spec, const StructLayout& layout,
               const RegionSpec& region, std::uint64_t seed) {
  switch (spec.kind) {
    case WorkloadSpec::Kind::seq_scan:
      return gen_seq_scan(layout, region.base, region.elem_count, spec.members);
    case WorkloadSpec::Kind::pointer_chase:
      return gen_pointer_chase(layout, region.base, region.elem_count,
                               spec.steps, seed);
    case WorkloadSpec::Kind::random:
      return gen_random(layout, region.base, region.elem_count, spec.steps,
                        seed, spec.members);
    case WorkloadSpec::Kind::trace_file:
      return read_trace(spec.path);
  }
  throw std::logic_error("unreachable workload kind");
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::uint64_t op_index = 0, addr = 0;
    std::uint32_t size = 0;
    char kind = 0;
    int n = std::sscanf(line.c_str(), "%" SCNu64 " %c 0x%" SCNx64 " %" SCNu32,
                        &op_index, &kind, &addr, &size);
    if (n != 4 || (kind != 'R' && kind != 'W') || size == 0)
      throw std::runtime_error("trace parse error at line " +
                               std::to_string(line_no) + ": '" + line + "'");
    trace.push_back({op_index, kind == 'R' ? AccessKind::read : AccessKind::write,
                     addr, size});
  }
  return trace;
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open trace file: " + path.string());
  return read_trace(in);
}

void write_trace(std::ostream& out, const Trace& trace) {
  char buf[96];
  for (const auto& a : trace) {
    std::snprintf(buf, sizeof buf, "%" PRIu64 " %c 0x%" PRIx64 " %" PRIu32 "\n",
                  a.op_index, a.kind == AccessKind::read ? 'R' : 'W', a.addr,
                  a.size);
    out << buf;
  }
}

void write_trace(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open trace file for writing: " +
                             path.string());
  write_trace(out, trace);
}

}  // namespace remapsim
