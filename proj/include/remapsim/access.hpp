#pragma once

#include <cstdint>
#include <vector>

namespace remapsim {

enum class AccessKind : std::uint8_t { read, write };

// One memory operation as seen by the simulator, before or after remapping.
struct MemoryAccess {
  std::uint64_t op_index = 0;
  AccessKind kind = AccessKind::read;
  std::uint64_t addr = 0;
  std::uint32_t size = 0;
};

using Trace = std::vector<MemoryAccess>;

inline bool operator==(const MemoryAccess& a, const MemoryAccess& b) {
  return a.op_index == b.op_index && a.kind == b.kind && a.addr == b.addr &&
         a.size == b.size;
}

}  // namespace remapsim
