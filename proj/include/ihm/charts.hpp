#pragma once

// Charts of a face. Every face carries a reference chart in which its
// corners 0, 1, 2 sit at 0, 1 and infinity (the standard triangle). The
// other charts are symmetries of the standard triangle applied to it.

#include "ihm/complex.hpp"
#include "ihm/hyperbolic.hpp"

namespace ihm {

inline IdealVertex reference_vertex(int corner) { return static_cast<IdealVertex>(corner); }

/// Reference chart -> chart with `at_zero`, `at_inf` and the remaining corner at 1.
inline Isometry chart_with(int at_zero, int at_inf) {
  std::array<IdealVertex, 3> images{};
  images[at_zero] = IdealVertex::Zero;
  images[at_inf] = IdealVertex::Infinity;
  images[3 - at_zero - at_inf] = IdealVertex::One;
  return standard_symmetry(images);
}

/// Corner chart of corner c: c at infinity, c+1 at 0, c+2 at 1. Side c is
/// the line x = 0 and side c+2 the line x = 1.
inline Isometry corner_chart(int c) { return chart_with((c + 1) % 3, c); }

/// Unscaled slot chart: tail at 0, head at infinity, third corner at 1.
inline Isometry slot_chart(const Slot& s) { return chart_with(s.tail_corner(), s.head_corner()); }

/// Edge local model chart of a slot with scale r: the face becomes r T.
inline Isometry edge_chart(const Slot& s, double r) {
  return Isometry::scaling(r).compose(slot_chart(s));
}

/// Horocyclic level at `corner` of a reference-chart point.
inline double corner_level(int corner, const UHPoint& p) {
  return cusp_level(reference_vertex(corner), p.z());
}

}  // namespace ihm
