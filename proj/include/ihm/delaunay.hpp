#pragma once

// Bowyer-Watson Delaunay triangulation of a planar point set. In the upper
// half-plane hyperbolic circles are Euclidean circles, so the Euclidean
// Delaunay triangulation of interior points is also the hyperbolic one.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

namespace ihm {

using Tri = std::array<int, 3>;

namespace detail {

inline long double orient2d(const std::array<double, 2>& a, const std::array<double, 2>& b,
                            const std::array<double, 2>& c) {
  return (static_cast<long double>(b[0]) - a[0]) * (static_cast<long double>(c[1]) - a[1]) -
         (static_cast<long double>(b[1]) - a[1]) * (static_cast<long double>(c[0]) - a[0]);
}

// > 0 when d lies inside the circumcircle of the counterclockwise triangle abc.
inline long double incircle(const std::array<double, 2>& a, const std::array<double, 2>& b,
                            const std::array<double, 2>& c, const std::array<double, 2>& d) {
  const long double adx = a[0] - static_cast<long double>(d[0]), ady = a[1] - static_cast<long double>(d[1]);
  const long double bdx = b[0] - static_cast<long double>(d[0]), bdy = b[1] - static_cast<long double>(d[1]);
  const long double cdx = c[0] - static_cast<long double>(d[0]), cdy = c[1] - static_cast<long double>(d[1]);
  const long double ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

}  // namespace detail

/// Counterclockwise Delaunay triangles of `pts`. Points are inserted in
/// lexicographic order; triangles touching the super triangle are dropped.
inline std::vector<Tri> delaunay(const std::vector<std::array<double, 2>>& input) {
  const int n = static_cast<int>(input.size());
  if (n < 3) return {};
  double xmin = input[0][0], xmax = xmin, ymin = input[0][1], ymax = ymin;
  for (const auto& p : input) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const double span = std::max(xmax - xmin, ymax - ymin);
  const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
  std::vector<std::array<double, 2>> pts = input;
  pts.push_back({cx - 40 * span, cy - 30 * span});
  pts.push_back({cx + 40 * span, cy - 30 * span});
  pts.push_back({cx, cy + 40 * span});

  struct Cell {
    Tri v;
    bool alive;
  };
  std::vector<Cell> cells{{{n, n + 1, n + 2}, true}};

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return input[a] < input[b]; });

  // Adjacency by directed edge -> cell, to walk the cavity instead of scanning.
  std::map<std::pair<int, int>, int> owner;
  auto link = [&](int c) {
    const Tri& t = cells[c].v;
    for (int k = 0; k < 3; ++k) owner[{t[k], t[(k + 1) % 3]}] = c;
  };
  auto unlink = [&](int c) {
    const Tri& t = cells[c].v;
    for (int k = 0; k < 3; ++k) owner.erase({t[k], t[(k + 1) % 3]});
  };
  link(0);

  int last = 0;
  for (int idx : order) {
    const auto& p = pts[idx];
    // Locate a cell whose circumcircle contains p: walk from the last cell.
    int start = -1;
    {
      int c = cells[last].alive ? last : -1;
      if (c < 0)
        for (int i = static_cast<int>(cells.size()) - 1; i >= 0; --i)
          if (cells[i].alive) {
            c = i;
            break;
          }
      for (int steps = 0; steps < 4 * static_cast<int>(cells.size()) + 8; ++steps) {
        const Tri& t = cells[c].v;
        int next = -1;
        for (int k = 0; k < 3; ++k)
          if (detail::orient2d(pts[t[k]], pts[t[(k + 1) % 3]], p) < 0) {
            auto it = owner.find({t[(k + 1) % 3], t[k]});
            if (it != owner.end()) {
              next = it->second;
              break;
            }
          }
        if (next < 0) break;
        c = next;
      }
      if (detail::incircle(pts[cells[c].v[0]], pts[cells[c].v[1]], pts[cells[c].v[2]], p) > 0)
        start = c;
      else
        for (std::size_t i = 0; i < cells.size(); ++i)
          if (cells[i].alive &&
              detail::incircle(pts[cells[i].v[0]], pts[cells[i].v[1]], pts[cells[i].v[2]], p) > 0) {
            start = static_cast<int>(i);
            break;
          }
    }
    if (start < 0) continue;  // duplicate point

    // Grow the cavity through neighbours whose circumcircle contains p.
    std::vector<int> cavity{start};
    std::vector<char> in_cavity(cells.size(), 0);
    in_cavity[start] = 1;
    std::vector<std::pair<int, int>> boundary;
    for (std::size_t q = 0; q < cavity.size(); ++q) {
      const Tri t = cells[cavity[q]].v;
      for (int k = 0; k < 3; ++k) {
        const int a = t[k], b = t[(k + 1) % 3];
        auto it = owner.find({b, a});
        if (it == owner.end()) {
          boundary.push_back({a, b});
          continue;
        }
        const int nb = it->second;
        if (in_cavity[nb]) continue;
        const Tri& u = cells[nb].v;
        if (detail::incircle(pts[u[0]], pts[u[1]], pts[u[2]], p) > 0) {
          in_cavity[nb] = 1;
          cavity.push_back(nb);
        } else {
          boundary.push_back({a, b});
        }
      }
    }
    for (int c : cavity) {
      unlink(c);
      cells[c].alive = false;
    }
    for (const auto& [a, b] : boundary) {
      cells.push_back({{a, b, idx}, true});
      link(static_cast<int>(cells.size()) - 1);
      last = static_cast<int>(cells.size()) - 1;
    }
  }

  std::vector<Tri> out;
  for (const Cell& c : cells)
    if (c.alive && c.v[0] < n && c.v[1] < n && c.v[2] < n) out.push_back(c.v);
  return out;
}

/// Smallest interior angle (radians) of a triangle.
inline double min_angle(const std::array<double, 2>& a, const std::array<double, 2>& b,
                        const std::array<double, 2>& c) {
  auto ang = [](const std::array<double, 2>& p, const std::array<double, 2>& q,
                const std::array<double, 2>& r) {
    const double ux = q[0] - p[0], uy = q[1] - p[1], vx = r[0] - p[0], vy = r[1] - p[1];
    return std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
  };
  return std::min({ang(a, b, c), ang(b, c, a), ang(c, a, b)});
}

}  // namespace ihm
