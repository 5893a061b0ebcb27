#pragma once

// Discretization of the cusp-truncated faces. Each face is split into three
// cusp regions by geodesic seams from its center to one edge node on each
// side (the edge node closest to the foot of that side). A region is meshed
// in its corner chart, where it reads {0 <= x <= 1, b(x) <= y <= L} with b
// given by the two seams and L the horocyclic cut level at that corner.
// Nodes on an edge are shared by all faces glued along it through a single
// edge-model height y.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "ihm/charts.hpp"
#include "ihm/complex.hpp"
#include "ihm/delaunay.hpp"
#include "ihm/errors.hpp"
#include "ihm/hyperbolic.hpp"
#include "ihm/metric.hpp"

namespace ihm {

struct MeshConfig {
  double h = 0.05;  // target hyperbolic edge length
  double y_cut = 2.0;
  double min_angle_deg = 20.0;
  int max_attempts = 16;
};

enum class NodeKind { Interior, Edge, Cut, Seam, Center };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Interior: return "interior";
    case NodeKind::Edge: return "edge";
    case NodeKind::Cut: return "cut";
    case NodeKind::Seam: return "seam";
    case NodeKind::Center: return "center";
  }
  return "?";
}

struct MeshNode {
  UHPoint p;  // reference chart of the face
  NodeKind kind = NodeKind::Interior;
  int side = -1;        // Edge: side of the face; Seam: side whose foot the seam reaches
  int corner = -1;      // Cut: cusp corner
  int edge_node = -1;   // Edge: shared edge-node class
  double s = 0.0;       // Edge: slot chart height (point i s)
  unsigned regions = 0; // bit c set when the node lies in the closed region of corner c
};

struct FaceMesh {
  int face = 0;
  std::vector<MeshNode> nodes;
  std::vector<Tri> triangles;  // counterclockwise in the reference chart
  std::array<double, 3> levels{};
  std::array<int, 3> split{-1, -1, -1};  // edge-node class where the seam of side k lands
  std::array<double, 3> split_level{};   // its level at corner k
  double min_angle_deg = 0.0;
};

struct EdgeNodeClass {
  int edge = 0;
  double y = 1.0;  // height in the edge local model
  bool fixed = false;  // cut endpoint: Dirichlet
  std::vector<std::pair<int, int>> members;  // (face, local node) per slot, slot order
};

struct ComplexMesh {
  Complex complex;
  IdealMetric sigma;
  MeshConfig cfg;
  double cut_level = 2.0;
  std::vector<EdgeLocalModel> edge_models;
  std::vector<std::array<double, 3>> corner_scales;  // vertex local model scale per face corner
  std::vector<FaceMesh> faces;
  std::vector<EdgeNodeClass> edge_nodes;
  std::vector<std::array<double, 2>> edge_range;  // per edge: cut endpoints (y_tail, y_head)

  double truncated_area() const {
    double a = 0.0;
    for (const FaceMesh& f : faces) a += IdealTriangle{1.0}.truncated_area(f.levels);
    return a;
  }

  /// Distinct nodes: per-face interior/cut nodes plus one per edge-node class.
  int num_nodes() const {
    int n = static_cast<int>(edge_nodes.size());
    for (const FaceMesh& f : faces)
      for (const MeshNode& m : f.nodes)
        if (m.kind != NodeKind::Edge) ++n;
    return n;
  }

  int num_triangles() const {
    int n = 0;
    for (const FaceMesh& f : faces) n += static_cast<int>(f.triangles.size());
    return n;
  }
};

namespace detail {

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic value in [-1, 1] for a lattice site.
inline double jitter(int face, int corner, long row, long col, int which) {
  std::uint64_t k = splitmix(static_cast<std::uint64_t>(face) * 1000003ULL + corner);
  k = splitmix(k ^ static_cast<std::uint64_t>(row * 7919 + 13));
  k = splitmix(k ^ static_cast<std::uint64_t>(col * 104729 + which));
  return static_cast<double>(k >> 11) / static_cast<double>(1ULL << 52) - 1.0;
}

// Seams of a region in its corner chart: geodesic circles (center x0, radius R)
// through the face center and the split points (0, a) and (1, b).
struct RegionSeams {
  double xl = 0.0, rl = 1.0, xr = 1.0, rr = 1.0;

  RegionSeams(double a, double b) {
    xl = 1.0 - a * a;
    rl = std::hypot(xl, a);
    xr = b * b;
    rr = std::hypot(1.0 - xr, b);
  }

  double height(double x) const {
    return x <= 0.5 ? std::sqrt(std::max(0.0, rl * rl - (x - xl) * (x - xl)))
                    : std::sqrt(std::max(0.0, rr * rr - (x - xr) * (x - xr)));
  }

  // Hyperbolic distance to the sides x = 0, x = 1 and to both seam geodesics.
  double clearance(double x, double y) const {
    auto to_circle = [&](double x0, double R) {
      const double d2 = (x - x0) * (x - x0) + y * y;
      return std::asinh(std::abs(d2 - R * R) / (2.0 * R * y));
    };
    return std::min({std::asinh(std::abs(x) / y), std::asinh(std::abs(1.0 - x) / y),
                     to_circle(xl, rl), to_circle(xr, rr)});
  }
};

// Edge sampling step in log y: at most h and at most the horocyclic width of
// every incident face at that height.
inline double edge_step(const std::vector<double>& r, double y, double h) {
  double d = h;
  for (double rj : r) d = std::min({d, rj / y, y / rj});
  return d;
}

// Interior samples of (a, b) spaced evenly in the step parameter t = int dlog y / step.
inline std::vector<double> edge_fill(const std::vector<double>& r, double a, double b, double h) {
  std::vector<double> logs{std::log(a)}, ts{0.0};
  const double lb = std::log(b);
  for (;;) {
    const double l = logs.back();
    const double d = edge_step(r, std::exp(l), h);
    if (l + d >= lb) {
      logs.push_back(lb);
      ts.push_back(ts.back() + (lb - l) / d);
      break;
    }
    logs.push_back(l + d);
    ts.push_back(ts.back() + 1.0);
  }
  const double N = ts.back();
  const int n = std::max(1, static_cast<int>(std::lround(N)));
  std::vector<double> out;
  std::size_t k = 0;
  for (int j = 1; j < n; ++j) {
    const double t = N * j / n;
    while (ts[k + 1] < t) ++k;
    const double w = (t - ts[k]) / (ts[k + 1] - ts[k]);
    out.push_back(std::exp(logs[k] + w * (logs[k + 1] - logs[k])));
  }
  return out;
}

}  // namespace detail

class MeshBuilder {
 public:
  explicit MeshBuilder(ComplexMesh& m) : m_(m) {}

  void init(const Complex& c, const IdealMetric& sigma, const MeshConfig& cfg) {
    if (!(cfg.h > 0.0)) throw Error(ErrorKind::InvalidSpec, "mesh size h must be positive");
    if (!(cfg.y_cut >= 2.0)) throw Error(ErrorKind::InvalidSpec, "cut level must be at least 2");
    m_.complex = c;
    m_.sigma = sigma;
    m_.cfg = cfg;
    m_.cut_level = cfg.y_cut;
    const auto vms = vertex_local_models(c, sigma);
    m_.corner_scales.assign(c.num_triangles(), {1.0, 1.0, 1.0});
    for (const auto& vm : vms)
      for (const auto& p : vm.corners) m_.corner_scales[p.corner.triangle][p.corner.corner] = p.scale;
    for (int e = 0; e < c.num_edges(); ++e) m_.edge_models.push_back(edge_local_model(c, sigma, e));
    m_.faces.resize(c.num_triangles());
    for (int t = 0; t < c.num_triangles(); ++t) {
      m_.faces[t].face = t;
      for (int k = 0; k < 3; ++k) m_.faces[t].levels[k] = cfg.y_cut / m_.corner_scales[t][k];
    }
    m_.edge_range.assign(c.num_edges(), {0.0, 0.0});
  }

  /// Cut endpoints of an edge at the current levels, checked across slots.
  std::array<double, 2> cut_range(int e) const {
    const Edge& edge = m_.complex.edge(e);
    const auto& r = m_.edge_models[e].scales;
    std::array<double, 2> out{};
    for (int j = 0; j < edge.degree(); ++j) {
      const Slot& s = edge.slots[j];
      const auto& L = m_.faces[s.triangle].levels;
      const double lo = r[j] / L[s.tail_corner()], hi = r[j] * L[s.head_corner()];
      if (j == 0) {
        out = {lo, hi};
      } else if (std::abs(lo / out[0] - 1.0) > 1e-9 || std::abs(hi / out[1] - 1.0) > 1e-9) {
        throw Error(ErrorKind::IncompleteMetric,
                    "cut levels disagree across the slots of edge " + std::to_string(e));
      }
    }
    return out;
  }

  void add_edge_samples(int e) {
    const double h = m_.cfg.h;
    const Edge& edge = m_.complex.edge(e);
    const auto& r = m_.edge_models[e].scales;
    const auto range = cut_range(e);
    const auto old = m_.edge_range[e];

    std::vector<double> ys{range[0], range[1]};
    auto fill = [&](double a, double b) {
      for (double y : detail::edge_fill(r, a, b, h)) ys.push_back(y);
    };
    if (old[0] == 0.0) {
      fill(range[0], range[1]);
    } else {
      fill(range[0], old[0]);
      fill(old[1], range[1]);
    }
    std::sort(ys.begin(), ys.end());

    for (double y : ys) {
      EdgeNodeClass cls;
      cls.edge = e;
      cls.y = y;
      cls.fixed = y == range[0] || y == range[1];
      const int id = static_cast<int>(m_.edge_nodes.size());
      for (int j = 0; j < edge.degree(); ++j) {
        const Slot& s = edge.slots[j];
        MeshNode n;
        n.kind = NodeKind::Edge;
        n.side = s.side;
        n.edge_node = id;
        n.s = y / r[j];
        n.p = slot_chart(s).inverse()(UHPoint{0.0, n.s});
        snap_to_side(n.p, s.side);
        FaceMesh& f = m_.faces[s.triangle];
        cls.members.push_back({s.triangle, static_cast<int>(f.nodes.size())});
        f.nodes.push_back(n);
      }
      m_.edge_nodes.push_back(std::move(cls));
    }
    m_.edge_range[e] = range;
  }

  /// Picks, once per face side, the edge node nearest the foot as seam endpoint.
  void choose_splits(int t) {
    FaceMesh& f = m_.faces[t];
    for (int k = 0; k < 3; ++k) {
      double best = INFINITY;
      for (const MeshNode& n : f.nodes)
        if (n.kind == NodeKind::Edge && n.side == k && std::abs(std::log(n.s)) < best) {
          best = std::abs(std::log(n.s));
          f.split[k] = n.edge_node;
        }
      const Slot& s = m_.complex.slot(t, k);
      const double sv = split_s(t, k);
      f.split_level[k] = s.head_corner() == k ? sv : 1.0 / sv;
    }
  }

  /// Region bits of edge nodes, relative to the split node of their side.
  void assign_edge_regions(int t) {
    FaceMesh& f = m_.faces[t];
    for (MeshNode& n : f.nodes) {
      if (n.kind != NodeKind::Edge) continue;
      const Slot& s = m_.complex.slot(t, n.side);
      const double sv = split_s(t, n.side);
      n.regions = 0;
      if (n.s >= sv) n.regions |= 1u << s.head_corner();
      if (n.s <= sv) n.regions |= 1u << s.tail_corner();
    }
  }

  detail::RegionSeams seams(int t, int c) const {
    const FaceMesh& f = m_.faces[t];
    return detail::RegionSeams(f.split_level[c], 1.0 / f.split_level[(c + 2) % 3]);
  }

  void add_cut_nodes(int t) {
    FaceMesh& f = m_.faces[t];
    for (int c = 0; c < 3; ++c) {
      const double L = f.levels[c];
      const int n = static_cast<int>(cut_count(L));
      const Isometry back = corner_chart(c).inverse();
      for (int i = 1; i < n; ++i) {
        MeshNode node;
        node.kind = NodeKind::Cut;
        node.corner = c;
        node.regions = 1u << c;
        node.p = back(UHPoint{static_cast<double>(i) / n, L});
        f.nodes.push_back(node);
      }
    }
  }

  void add_seams(int t) {
    FaceMesh& f = m_.faces[t];
    MeshNode center;
    center.kind = NodeKind::Center;
    center.regions = 7u;
    center.p = IdealTriangle{1.0}.center();
    f.nodes.push_back(center);
    for (int k = 0; k < 3; ++k) {
      // Seam of side k is the left seam of the region of corner k; points are
      // spaced evenly in arclength u = log tan(theta / 2) along its circle.
      const detail::RegionSeams g = seams(t, k);
      const double a = f.split_level[k];
      const double th0 = std::atan2(a, -g.xl);
      const double th1 = std::atan2(std::sqrt(3.0) / 2.0, 0.5 - g.xl);
      const double u0 = std::log(std::tan(th0 / 2)), u1 = std::log(std::tan(th1 / 2));
      const int n = std::max(2, static_cast<int>(std::lround(std::abs(u1 - u0) / m_.cfg.h)));
      const Isometry back = corner_chart(k).inverse();
      for (int i = 1; i < n; ++i) {
        const double th = 2.0 * std::atan(std::exp(u0 + (u1 - u0) * i / n));
        MeshNode node;
        node.kind = NodeKind::Seam;
        node.side = k;
        node.regions = (1u << k) | (1u << ((k + 1) % 3));
        node.p = back(UHPoint{g.xl + g.rl * std::cos(th), g.rl * std::sin(th)});
        f.nodes.push_back(node);
      }
    }
  }

  long cut_count(double L) const {
    return std::max(2L, static_cast<long>(std::ceil(1.0 / (L * m_.cfg.h) - 1e-9)));
  }

  /// Lattice nodes of region c in the level band (y_from, L), margin in units
  /// of h; `phase` shifts the rows by a fraction of the row spacing.
  void add_lattice(int t, int c, double y_from, double margin, double phase) {
    FaceMesh& f = m_.faces[t];
    const double h = m_.cfg.h;
    const double L = f.levels[c];
    const double dy = h * std::sqrt(3.0) / 2.0;
    const long k0 = static_cast<long>(std::floor(std::log(std::sqrt(3.0) / 2.0) / dy));
    const long k1 = static_cast<long>(std::ceil(std::log(L) / dy));
    const Isometry back = corner_chart(c).inverse();
    const detail::RegionSeams g = seams(t, c);
    for (long k = k0; k <= k1; ++k) {
      const double y0 = std::exp((k + phase) * dy);
      // never coarser than the cut row, whose count is rounded up
      const long m = std::max({1L, std::lround(1.0 / (h * y0)), cut_count(L)});
      for (long i = 0; i <= m; ++i) {
        double x = (static_cast<double>(i) + ((k & 1) ? 0.5 : 0.0)) / static_cast<double>(m);
        x += 0.02 * h * y0 * detail::jitter(t, c, k, i, 0);
        const double y = y0 * std::exp(0.02 * h * detail::jitter(t, c, k, i, 1));
        if (x <= 0.0 || x >= 1.0) continue;
        if (y <= y_from || y >= L) continue;
        if (y <= g.height(x)) continue;
        if (std::log(L / y) < margin * h) continue;
        if (y_from > 0.0 && std::log(y / y_from) < margin * h) continue;
        if (g.clearance(x, y) < margin * h) continue;
        MeshNode node;
        node.kind = NodeKind::Interior;
        node.regions = 1u << c;
        node.p = back(UHPoint{x, y});
        f.nodes.push_back(node);
      }
    }
  }

  /// Delaunay triangulation of every region of face t from its current nodes.
  /// Returns false if a region fails the boundary or quality checks.
  bool triangulate(int t, std::string* why) {
    FaceMesh& f = m_.faces[t];
    f.triangles.clear();
    double worst = 180.0;
    for (int c = 0; c < 3; ++c) {
      const Isometry to = corner_chart(c);
      const double L = f.levels[c];
      const detail::RegionSeams g = seams(t, c);
      std::vector<int> ids;
      std::vector<std::array<double, 2>> pts;
      for (int i = 0; i < static_cast<int>(f.nodes.size()); ++i) {
        const MeshNode& n = f.nodes[i];
        if (!(n.regions & (1u << c))) continue;
        ids.push_back(i);
        pts.push_back(corner_coords(n, c, to));
      }
      const std::vector<Tri> tris = delaunay(pts);
      std::vector<std::vector<int>> adj(ids.size());
      int kept = 0;
      for (const Tri& tr : tris) {
        const double cx = (pts[tr[0]][0] + pts[tr[1]][0] + pts[tr[2]][0]) / 3.0;
        const double cy = (pts[tr[0]][1] + pts[tr[1]][1] + pts[tr[2]][1]) / 3.0;
        if (cx <= 0.0 || cx >= 1.0 || cy >= L || cy <= g.height(cx)) continue;
        ++kept;
        worst = std::min(worst, min_angle(pts[tr[0]], pts[tr[1]], pts[tr[2]]) * 180.0 / std::numbers::pi);
        for (int k = 0; k < 3; ++k) {
          adj[tr[k]].push_back(tr[(k + 1) % 3]);
          adj[tr[(k + 1) % 3]].push_back(tr[k]);
        }
        Tri g{ids[tr[0]], ids[tr[1]], ids[tr[2]]};
        const UHPoint &a = f.nodes[g[0]].p, &b = f.nodes[g[1]].p, &d = f.nodes[g[2]].p;
        const double area = (b.x - a.x) * (d.y - a.y) - (b.y - a.y) * (d.x - a.x);
        if (area < 0) std::swap(g[1], g[2]);
        if (std::abs(area) < 2e-14) {
          if (why) *why = "degenerate triangle in face " + std::to_string(t);
          return false;
        }
        f.triangles.push_back(g);
      }
      if (kept == 0) {
        if (why) *why = "empty region in face " + std::to_string(t);
        return false;
      }
      // Boundary loop: every consecutive pair must be a mesh edge.
      const std::vector<int> loop = boundary_loop(f, c, ids, pts);
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const int a = loop[i], b = loop[(i + 1) % loop.size()];
        if (std::find(adj[a].begin(), adj[a].end(), b) == adj[a].end()) {
          if (why)
            *why = "boundary segment missing in face " + std::to_string(t) + " corner " +
                   std::to_string(c);
          return false;
        }
      }
    }
    f.min_angle_deg = worst;
    if (worst < m_.cfg.min_angle_deg) {
      if (why)
        *why = "minimum angle " + std::to_string(worst) + " deg in face " + std::to_string(t);
      return false;
    }
    return true;
  }

  /// Drops interior lattice nodes of the band above `y_from` in every region
  /// of face t, so a retry can regenerate them with another margin.
  void drop_lattice(int t, const std::vector<char>& keep) {
    FaceMesh& f = m_.faces[t];
    std::vector<int> remap(f.nodes.size(), -1);
    std::vector<MeshNode> nodes;
    for (std::size_t i = 0; i < f.nodes.size(); ++i)
      if (i < keep.size() ? keep[i] : false) {
        remap[i] = static_cast<int>(nodes.size());
        nodes.push_back(f.nodes[i]);
      }
    // Edge nodes are never dropped, so class members stay valid after remapping.
    for (EdgeNodeClass& cls : m_.edge_nodes)
      for (auto& [face, local] : cls.members)
        if (face == t) local = remap[local];
    f.nodes = std::move(nodes);
  }

  /// Fills lattice nodes above the level fraction `band_from` of each region
  /// and triangulates, growing the margin on failure.
  void mesh_face(int t, double band_scale) {
    FaceMesh& f = m_.faces[t];
    const std::size_t base = f.nodes.size();
    std::string why;
    for (int attempt = 0; attempt < m_.cfg.max_attempts; ++attempt) {
      // margins 0.6 to 0.9, then the same with the rows shifted by half a step
      const double margin = 0.6 + 0.1 * (attempt % 4);
      const double phase = 0.5 * ((attempt / 4) % 2) + 0.25 * ((attempt / 8) % 2);
      std::vector<char> keep(f.nodes.size(), 1);
      for (std::size_t i = base; i < keep.size(); ++i) keep[i] = 0;
      if (f.nodes.size() > base) drop_lattice(t, keep);
      for (int c = 0; c < 3; ++c)
        add_lattice(t, c, band_scale > 0.0 ? f.levels[c] * band_scale : 0.0, margin, phase);
      if (triangulate(t, &why)) return;
    }
    throw Error(ErrorKind::MeshQualityFailure, why);
  }

 private:
  double split_s(int t, int k) const {
    const EdgeNodeClass& cls = m_.edge_nodes[m_.faces[t].split[k]];
    for (const auto& [face, local] : cls.members)
      if (face == t && m_.faces[t].nodes[local].side == k) return m_.faces[t].nodes[local].s;
    return 1.0;
  }

  static void snap_to_side(UHPoint& p, int side) {
    if (side == 2) p.x = 0.0;  // corners 2 (infinity) and 0
    if (side == 1) p.x = 1.0;  // corners 1 and 2
  }

  // Corner-chart coordinates, exact on the sides of the region.
  static std::array<double, 2> corner_coords(const MeshNode& n, int c, const Isometry& to) {
    if (n.kind == NodeKind::Edge) {
      const double level = corner_level(c, n.p);
      if (n.side == c) return {0.0, level};
      return {1.0, level};
    }
    const UHPoint q = to(n.p);
    return {q.x, q.y};
  }

  // Boundary nodes of region c in loop order: up the left side, along the
  // cut, down the right side, then along both seams through the center.
  std::vector<int> boundary_loop(const FaceMesh& f, int c, const std::vector<int>& ids,
                                 const std::vector<std::array<double, 2>>& pts) const {
    std::vector<std::pair<double, int>> left, cut, right, seam_r, seam_l;
    int center = -1;
    const int right_side = (c + 2) % 3;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const MeshNode& n = f.nodes[ids[i]];
      const int li = static_cast<int>(i);
      if (n.kind == NodeKind::Edge) {
        (n.side == c ? left : right).push_back({pts[i][1], li});
      } else if (n.kind == NodeKind::Cut && n.corner == c) {
        cut.push_back({pts[i][0], li});
      } else if (n.kind == NodeKind::Seam) {
        (n.side == c ? seam_l : seam_r).push_back({pts[i][0], li});
      } else if (n.kind == NodeKind::Center) {
        center = li;
      }
    }
    (void)right_side;
    std::sort(left.begin(), left.end());
    std::sort(cut.begin(), cut.end());
    std::sort(right.begin(), right.end(), std::greater<>());
    std::sort(seam_r.begin(), seam_r.end(), std::greater<>());
    std::sort(seam_l.begin(), seam_l.end(), std::greater<>());
    std::vector<int> loop;
    for (auto& v : left) loop.push_back(v.second);
    for (auto& v : cut) loop.push_back(v.second);
    for (auto& v : right) loop.push_back(v.second);
    for (auto& v : seam_r) loop.push_back(v.second);
    loop.push_back(center);
    for (auto& v : seam_l) loop.push_back(v.second);
    return loop;
  }

  ComplexMesh& m_;
};

/// Meshes the complex truncated at level cfg.y_cut in every vertex local model of sigma.
inline ComplexMesh build_mesh(const Complex& c, const IdealMetric& sigma, const MeshConfig& cfg) {
  ComplexMesh m;
  MeshBuilder b(m);
  b.init(c, sigma, cfg);
  for (int e = 0; e < c.num_edges(); ++e) b.add_edge_samples(e);
  for (int t = 0; t < c.num_triangles(); ++t) {
    b.choose_splits(t);
    b.assign_edge_regions(t);
    b.add_cut_nodes(t);
    b.add_seams(t);
    b.mesh_face(t, 0.0);
  }
  return m;
}

/// Extends the mesh to the cut level next_y. Old nodes keep their ids and
/// positions; old cut nodes become interior and old cut endpoints free.
inline ComplexMesh exhaust(const ComplexMesh& old, double next_y) {
  if (next_y == old.cut_level) return old;
  if (!(next_y > old.cut_level))
    throw Error(ErrorKind::InvalidSpec, "exhaustion level must increase");
  ComplexMesh m = old;
  const double ratio = next_y / old.cut_level;
  m.cut_level = next_y;
  m.cfg.y_cut = next_y;
  for (FaceMesh& f : m.faces) {
    for (double& L : f.levels) L *= ratio;
    for (MeshNode& n : f.nodes)
      if (n.kind == NodeKind::Cut) n.kind = NodeKind::Interior;
  }
  for (EdgeNodeClass& cls : m.edge_nodes) cls.fixed = false;
  MeshBuilder b(m);
  for (int e = 0; e < m.complex.num_edges(); ++e) b.add_edge_samples(e);
  for (int t = 0; t < m.complex.num_triangles(); ++t) {
    b.assign_edge_regions(t);
    b.add_cut_nodes(t);
    b.mesh_face(t, 1.0 / ratio);
  }
  return m;
}

}  // namespace ihm
