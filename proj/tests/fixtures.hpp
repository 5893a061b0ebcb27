#pragma once

#include "ihm/complex.hpp"

namespace ihm::testing {

/// Two triangles glued side to side with matching orientations.
inline ComplexSpec double_triangle_spec() {
  ComplexSpec s;
  s.triangles = 2;
  for (int i = 0; i < 3; ++i) s.edge_classes.push_back({{0, i, 1}, {1, i, 1}});
  return s;
}

inline ComplexSpec single_triangle_spec() {
  ComplexSpec s;
  s.triangles = 1;
  for (int i = 0; i < 3; ++i) s.edge_classes.push_back({{0, i, 1}});
  return s;
}

/// Three pages sharing side 0; the remaining sides are paired cyclically.
inline ComplexSpec book_spec() {
  ComplexSpec s;
  s.triangles = 3;
  s.edge_classes.push_back({{0, 0, 1}, {1, 0, 1}, {2, 0, 1}});
  s.edge_classes.push_back({{0, 1, 1}, {1, 2, -1}});
  s.edge_classes.push_back({{1, 1, 1}, {2, 2, -1}});
  s.edge_classes.push_back({{2, 1, 1}, {0, 2, -1}});
  return s;
}

/// Once-punctured torus: two triangles, three edges, one vertex.
inline ComplexSpec punctured_torus_spec() {
  ComplexSpec s;
  s.triangles = 2;
  s.edge_classes.push_back({{0, 0, 1}, {1, 0, -1}});
  s.edge_classes.push_back({{0, 1, 1}, {1, 1, -1}});
  s.edge_classes.push_back({{0, 2, 1}, {1, 2, -1}});
  return s;
}

}  // namespace ihm::testing
