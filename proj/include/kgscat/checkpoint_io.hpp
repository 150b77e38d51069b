#pragma once

// Binary snapshots: a fixed header (magic, version, march variable, grid
// spec) followed by the fields as raw row-major doubles, native byte order.

#include <cstdint>
#include <string>

#include "kgscat/cartesian_solver.hpp"
#include "kgscat/hyperbolic_solver.hpp"

namespace kgscat {

enum class MarchVariable : std::uint32_t { Rho = 0, T = 1 };

struct CheckpointHeader {
  MarchVariable variable = MarchVariable::Rho;
  double at = 0.0;         // rho or t of the snapshot
  double lo = 0.0;         // first grid point
  double hi = 0.0;         // last grid point
  std::uint64_t points = 0;
  std::uint64_t fields = 2;  // (V, V_rho) or (v, v_t)
};

inline constexpr char kCheckpointMagic[8] = {'K', 'G', 'S', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// IoError when the file cannot be written.
void write_checkpoint(const std::string& path, const FieldGrid& f);
void write_checkpoint(const std::string& path, const CartesianState& s);

/// IoError on a missing file, bad magic, version or march variable, or a
/// truncated payload.
CheckpointHeader read_checkpoint_header(const std::string& path);
FieldGrid read_field_checkpoint(const std::string& path);
CartesianState read_cartesian_checkpoint(const std::string& path);

}  // namespace kgscat
