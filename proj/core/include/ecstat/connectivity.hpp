#pragma once

#include <string>

#include "ecstat/errors.hpp"

namespace ecstat {

/// Adjacency rule for the cubical complex built on grid vertices.
/// 2D: vertex4 joins axis neighbours only, vertex8 also joins diagonals.
/// 3D: face6 joins axis neighbours, full26 joins all cube neighbours.
/// 1D has a single rule; any value is accepted for 1D fields.
enum class Connectivity { vertex4, vertex8, face6, full26 };

inline Connectivity default_connectivity(int dim) {
  return dim == 3 ? Connectivity::face6 : Connectivity::vertex4;
}

inline void check_connectivity(Connectivity c, int dim) {
  if (dim == 1) return;
  if (dim == 2 && (c == Connectivity::vertex4 || c == Connectivity::vertex8)) return;
  if (dim == 3 && (c == Connectivity::face6 || c == Connectivity::full26)) return;
  throw ValidationError("connectivity rule not admissible for dimension " + std::to_string(dim));
}

/// Parse the CLI spelling {4, 8, 6, 26}.
inline Connectivity connectivity_from_int(int v) {
  switch (v) {
    case 4: return Connectivity::vertex4;
    case 8: return Connectivity::vertex8;
    case 6: return Connectivity::face6;
    case 26: return Connectivity::full26;
    default: throw ValidationError("connectivity must be one of {4, 8, 6, 26}");
  }
}

inline int connectivity_to_int(Connectivity c) {
  switch (c) {
    case Connectivity::vertex4: return 4;
    case Connectivity::vertex8: return 8;
    case Connectivity::face6: return 6;
    case Connectivity::full26: return 26;
  }
  return 4;
}

}  // namespace ecstat
