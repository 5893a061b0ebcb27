#pragma once

// Diagnostics of a computed map: Hopf differential and its holomorphy
// defect, edge balancing, the interior harmonic map equations, degree,
// energy density bounds and Jacobian positivity.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "ihm/energy.hpp"

namespace ihm {

namespace detail {

inline std::vector<std::vector<int>> node_triangles(const FaceMesh& f) {
  std::vector<std::vector<int>> out(f.nodes.size());
  for (std::size_t k = 0; k < f.triangles.size(); ++k)
    for (int v : f.triangles[k]) out[v].push_back(static_cast<int>(k));
  return out;
}

inline std::array<UHPoint, 3> tri_images(const SimplicialMap& u, int t, const Tri& tr) {
  return {u.image[t][tr[0]], u.image[t][tr[1]], u.image[t][tr[2]]};
}

inline std::array<UHPoint, 3> tri_nodes(const FaceMesh& f, const Tri& tr) {
  return {f.nodes[tr[0]].p, f.nodes[tr[1]].p, f.nodes[tr[2]].p};
}

/// Jacobian of the affine map on a triangle: rows f1, f2; columns x, y.
inline Mat2 affine_jacobian(const TriGeom& g, const std::array<UHPoint, 3>& q) {
  Mat2 j{0, 0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    j.a += q[i].x * g.grad[i][0];
    j.b += q[i].x * g.grad[i][1];
    j.c += q[i].y * g.grad[i][0];
    j.d += q[i].y * g.grad[i][1];
  }
  return j;
}

/// Hopf coefficient of a map with Jacobian `df` at an image point of height v.
inline Cplx hopf_coefficient(const Mat2& df, double v) {
  const double fx1 = df.a, fx2 = df.c, fy1 = df.b, fy2 = df.d;
  const double re = fx1 * fx1 + fx2 * fx2 - fy1 * fy1 - fy2 * fy2;
  const double im = -2.0 * (fx1 * fy1 + fx2 * fy2);
  return Cplx(re, im) / (v * v);
}

}  // namespace detail

struct HopfField {
  int face = 0;
  std::vector<UHPoint> nodes;
  std::vector<Tri> triangles;
  std::vector<Cplx> phi;  // per triangle, face reference chart
};

/// Per-triangle Hopf coefficient with norms taken in the target metric at the
/// image of the centroid.
inline HopfField hopf(const SimplicialMap& u, int face) {
  const FaceMesh& f = u.mesh->faces[face];
  HopfField h;
  h.face = face;
  for (const MeshNode& n : f.nodes) h.nodes.push_back(n.p);
  h.triangles = f.triangles;
  for (const Tri& tr : f.triangles) {
    const auto q = detail::tri_images(u, face, tr);
    const auto p = detail::tri_nodes(f, tr);
    const TriGeom g = tri_geom(p[0], p[1], p[2]);
    const double vc = (q[0].y + q[1].y + q[2].y) / 3.0;
    h.phi.push_back(detail::hopf_coefficient(detail::affine_jacobian(g, q), vc));
  }
  return h;
}

struct HolomorphyResidual {
  double norm = 0.0;
  std::vector<Cplx> dbar;         // per triangle
  std::vector<double> node_field;  // mean |dbar| over incident triangles
};

/// Norm of dbar(phi), with phi reconstructed linearly by least squares over
/// each triangle and the triangles sharing a vertex with it. The integrand
/// |dbar phi|^2 y^4 dx dy does not depend on the chart of the face.
inline HolomorphyResidual holomorphy_residual(const HopfField& h) {
  const std::size_t nt = h.triangles.size();
  std::vector<std::vector<int>> vt(h.nodes.size());
  for (std::size_t k = 0; k < nt; ++k)
    for (int v : h.triangles[k]) vt[v].push_back(static_cast<int>(k));
  std::vector<UHPoint> cen(nt);
  std::vector<double> area(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto& tr = h.triangles[k];
    const UHPoint &a = h.nodes[tr[0]], &b = h.nodes[tr[1]], &c = h.nodes[tr[2]];
    cen[k] = {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    area[k] = 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
  }
  HolomorphyResidual r;
  r.dbar.assign(nt, Cplx(0.0, 0.0));
  double sum = 0.0;
  for (std::size_t k = 0; k < nt; ++k) {
    std::set<int> st;
    for (int v : h.triangles[k]) st.insert(vt[v].begin(), vt[v].end());
    if (st.size() < 3) continue;
    const double scale = std::sqrt(area[k]);
    Eigen::MatrixXd A(st.size(), 3);
    Eigen::MatrixXcd rhs(st.size(), 1);
    int i = 0;
    for (int q : st) {
      A(i, 0) = 1.0;
      A(i, 1) = (cen[q].x - cen[k].x) / scale;
      A(i, 2) = (cen[q].y - cen[k].y) / scale;
      rhs(i, 0) = h.phi[q];
      ++i;
    }
    const Eigen::MatrixXcd c = A.cast<Cplx>().colPivHouseholderQr().solve(rhs);
    r.dbar[k] = 0.5 * (c(1, 0) + Cplx(0.0, 1.0) * c(2, 0)) / scale;
    const double y2 = cen[k].y * cen[k].y;
    sum += std::norm(r.dbar[k]) * y2 * y2 * area[k];
  }
  r.norm = std::sqrt(sum);
  r.node_field.assign(h.nodes.size(), 0.0);
  for (std::size_t v = 0; v < vt.size(); ++v) {
    for (int k : vt[v]) r.node_field[v] += std::abs(r.dbar[k]);
    if (!vt[v].empty()) r.node_field[v] /= vt[v].size();
  }
  return r;
}

/// Cosine window on the middle half of [lo, hi] in log y.
inline double balance_bump(double y, const std::array<double, 2>& range) {
  const double l0 = std::log(range[0]), l1 = std::log(range[1]);
  const double a = l0 + 0.25 * (l1 - l0), b = l1 - 0.25 * (l1 - l0);
  const double s = (std::log(y) - a) / (b - a);
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * s));
}

struct BalanceSample {
  double y = 0.0;
  double strong = 0.0;   // sum_j d f_j^2 / dx
  double hopf_im = 0.0;  // Im sum_j phi_j
};

struct EdgeBalance {
  int edge = 0;
  double hopf_imbalance = 0.0;
  double strong_balance = 0.0;
  double weak_balance = 0.0;       // quadrature of the one-sided samples
  double weak_variation = 0.0;     // same pairing from the discrete energy gradient
  std::vector<BalanceSample> profile;
};

/// Jacobian of a member of an edge-node class in its own edge local models:
/// sigma chart for the domain, tau chart for the target. The derivative of
/// the map at the node is the area weighted mean over incident triangles.
inline Mat2 edge_member_jacobian(const SimplicialMap& u, int face, int local,
                                 const std::vector<std::vector<int>>& node_tris) {
  const FaceMesh& f = u.mesh->faces[face];
  const MeshNode& n = f.nodes[local];
  Mat2 du{0, 0, 0, 0};
  double wsum = 0.0;
  for (int k : node_tris[local]) {
    const Tri& tr = f.triangles[k];
    const auto p = detail::tri_nodes(f, tr);
    const TriGeom g = tri_geom(p[0], p[1], p[2]);
    const Mat2 j = detail::affine_jacobian(g, detail::tri_images(u, face, tr));
    du = {du.a + g.area * j.a, du.b + g.area * j.b, du.c + g.area * j.c, du.d + g.area * j.d};
    wsum += g.area;
  }
  du = {du.a / wsum, du.b / wsum, du.c / wsum, du.d / wsum};
  const Complex& c = u.mesh->complex;
  const int e = c.edge_of(face, n.side);
  const int j = c.slot_position(face, n.side);
  const Slot& s = c.edge(e).slots[j];
  const Mat2 ds = edge_chart(s, u.mesh->edge_models[e].scales[j]).jacobian(n.p.z());
  const Mat2 dt = edge_chart(s, u.tau_edges[e].scales[j]).jacobian(u.image[face][local].z());
  return dt * du * ds.inverse();
}

inline EdgeBalance edge_balance(const SimplicialMap& u, int e,
                                const std::vector<std::vector<std::vector<int>>>& node_tris,
                                const Eigen::VectorXd& grad, const DofMap& dofs) {
  const ComplexMesh& m = *u.mesh;
  const auto range = m.edge_range[e];
  EdgeBalance out;
  out.edge = e;
  for (std::size_t k = 0; k < m.edge_nodes.size(); ++k) {
    const EdgeNodeClass& cls = m.edge_nodes[k];
    if (cls.edge != e) continue;
    const double psi = balance_bump(cls.y, range);
    if (dofs.edge[k] >= 0) out.weak_variation += -0.5 * psi * std::exp(u.edge_logy[k]) * grad[dofs.edge[k]];
    const double l0 = std::log(range[0]), l1 = std::log(range[1]), ly = std::log(cls.y);
    if (ly < l0 + 0.25 * (l1 - l0) || ly > l1 - 0.25 * (l1 - l0)) continue;
    BalanceSample s;
    s.y = cls.y;
    Cplx phi_sum(0.0, 0.0);
    const double v = std::exp(u.edge_logy[k]);
    for (const auto& [face, local] : cls.members) {
      const Mat2 df = edge_member_jacobian(u, face, local, node_tris[face]);
      s.strong += df.c;
      phi_sum += detail::hopf_coefficient(df, v);
    }
    s.hopf_im = phi_sum.imag();
    out.profile.push_back(s);
  }
  std::sort(out.profile.begin(), out.profile.end(),
            [](const BalanceSample& a, const BalanceSample& b) { return a.y < b.y; });
  for (const BalanceSample& s : out.profile) {
    out.hopf_imbalance = std::max(out.hopf_imbalance, std::abs(s.hopf_im));
    out.strong_balance = std::max(out.strong_balance, std::abs(s.strong));
  }
  for (std::size_t i = 0; i + 1 < out.profile.size(); ++i) {
    const BalanceSample &a = out.profile[i], &b = out.profile[i + 1];
    out.weak_balance += 0.5 * (b.y - a.y) *
                        (balance_bump(a.y, range) * a.strong + balance_bump(b.y, range) * b.strong);
  }
  return out;
}

inline EdgeBalance edge_balance(const SimplicialMap& u, int e,
                                Quadrature quad = Quadrature::Exact) {
  std::vector<std::vector<std::vector<int>>> nt;
  for (const FaceMesh& f : u.mesh->faces) nt.push_back(detail::node_triangles(f));
  const DofMap d = DofMap::build(*u.mesh);
  const Eigen::VectorXd g = energy_gradient(u, d, MeshGeometry::build(*u.mesh), quad);
  return edge_balance(u, e, nt, g, d);
}

struct PdeResidual {
  double norm = 0.0;
  std::vector<double> node_field;  // sqrt(r1^2 + r2^2), zero where not evaluated
  int evaluated = 0;
};

/// Residuals of the harmonic map equations into the upper half-plane,
///   lap f1 - (2 / f2) <grad f1, grad f2> = 0,
///   lap f2 + (1 / f2) (|grad f1|^2 - |grad f2|^2) = 0,
/// at free nodes, with f quadratic least squares fits over the 2-ring.
inline PdeResidual pde_residual(const SimplicialMap& u, int face) {
  const FaceMesh& f = u.mesh->faces[face];
  const auto nt = detail::node_triangles(f);
  PdeResidual out;
  out.node_field.assign(f.nodes.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.nodes.size(); ++i) {
    const NodeKind kind = f.nodes[i].kind;
    if (kind != NodeKind::Interior && kind != NodeKind::Seam && kind != NodeKind::Center) continue;
    std::set<int> ring{static_cast<int>(i)};
    for (int pass = 0; pass < 2; ++pass) {
      std::set<int> next = ring;
      for (int v : ring)
        for (int k : nt[v])
          for (int w : f.triangles[k]) next.insert(w);
      ring.swap(next);
    }
    if (ring.size() < 8) continue;
    const UHPoint p0 = f.nodes[i].p;
    double area = 0.0;
    for (int k : nt[i]) {
      const auto p = detail::tri_nodes(f, f.triangles[k]);
      area += tri_geom(p[0], p[1], p[2]).area / 3.0;
    }
    const double sc = std::sqrt(3.0 * area / std::max<std::size_t>(1, nt[i].size()));
    Eigen::MatrixXd A(ring.size(), 6);
    Eigen::MatrixXd rhs(ring.size(), 2);
    int r = 0;
    for (int v : ring) {
      const double dx = (f.nodes[v].p.x - p0.x) / sc, dy = (f.nodes[v].p.y - p0.y) / sc;
      A.row(r) << 1.0, dx, dy, dx * dx, dx * dy, dy * dy;
      rhs(r, 0) = u.image[face][v].x;
      rhs(r, 1) = u.image[face][v].y;
      ++r;
    }
    const Eigen::MatrixXd c = A.colPivHouseholderQr().solve(rhs);
    const double f2 = c(0, 1);
    const double f1x = c(1, 0) / sc, f1y = c(2, 0) / sc, f2x = c(1, 1) / sc, f2y = c(2, 1) / sc;
    const double lap1 = 2.0 * (c(3, 0) + c(5, 0)) / (sc * sc);
    const double lap2 = 2.0 * (c(3, 1) + c(5, 1)) / (sc * sc);
    const double r1 = lap1 - 2.0 / f2 * (f1x * f2x + f1y * f2y);
    const double r2 = lap2 + 1.0 / f2 * (f1x * f1x + f1y * f1y - f2x * f2x - f2y * f2y);
    out.node_field[i] = std::hypot(r1, r2);
    sum += (r1 * r1 + r2 * r2) * area;
    ++out.evaluated;
  }
  out.norm = std::sqrt(sum);
  return out;
}

struct DegreeReport {
  int degree = 0;
  bool consistent = true;
  std::uint64_t seed = 0;
  std::vector<int> face_of_sample;
  std::vector<UHPoint> samples;
  std::vector<int> counts;
};

/// Signed count of image triangles covering sample points of each target
/// face. Samples are drawn well inside the image of the truncated face and
/// away from image triangle edges.
inline DegreeReport degree_estimate(const SimplicialMap& u, int samples_per_face = 25,
                                    std::uint64_t seed = 12345, bool throw_on_inconsistent = true) {
  DegreeReport rep;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ComplexMesh& m = *u.mesh;
  for (std::size_t t = 0; t < m.faces.size(); ++t) {
    const FaceMesh& f = m.faces[t];
    // Lowest image level of the truncation curve at each corner.
    std::array<double, 3> cap{m.cut_level, m.cut_level, m.cut_level};
    std::array<double, 3> lowest{std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity()};
    // Each cut node image counts towards the target corner it is closest to,
    // which for an orientation reversing map need not be its own corner.
    for (std::size_t i = 0; i < f.nodes.size(); ++i) {
      if (f.nodes[i].kind != NodeKind::Cut) continue;
      std::array<double, 3> lv{};
      for (int c = 0; c < 3; ++c) lv[c] = corner_level(c, u.image[t][i]);
      const int c = static_cast<int>(std::max_element(lv.begin(), lv.end()) - lv.begin());
      lowest[c] = std::min(lowest[c], lv[c]);
    }
    for (int c = 0; c < 3; ++c)
      if (std::isfinite(lowest[c])) cap[c] = 0.5 * lowest[c];
    int drawn = 0;
    for (int attempt = 0; drawn < samples_per_face && attempt < 100000; ++attempt) {
      const double x = unit(rng);
      const double y = std::exp(std::log(1e-3) + unit(rng) * (std::log(cap[2]) - std::log(1e-3)));
      const UHPoint p{x, y};
      if (!in_closed_face(p, -1e-6)) continue;
      bool ok = true;
      for (int c = 0; c < 3 && ok; ++c) ok = corner_level(c, p) < cap[c];
      if (!ok) continue;
      int count = 0;
      bool clean = true;
      for (const Tri& tr : f.triangles) {
        const auto q = detail::tri_images(u, static_cast<int>(t), tr);
        const double det = (q[1].x - q[0].x) * (q[2].y - q[0].y) - (q[1].y - q[0].y) * (q[2].x - q[0].x);
        if (det == 0.0) continue;
        std::array<double, 3> bary{};
        for (int k = 0; k < 3; ++k) {
          const UHPoint &a = q[(k + 1) % 3], &b = q[(k + 2) % 3];
          bary[k] = ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / det;
        }
        const double lo = std::min({bary[0], bary[1], bary[2]});
        if (std::abs(lo) < 1e-9) {
          clean = false;
          break;
        }
        if (lo > 0.0) count += det > 0.0 ? 1 : -1;
      }
      if (!clean) continue;
      rep.face_of_sample.push_back(static_cast<int>(t));
      rep.samples.push_back(p);
      rep.counts.push_back(count);
      ++drawn;
    }
  }
  if (rep.counts.empty()) {
    rep.consistent = false;
  } else {
    rep.degree = rep.counts.front();
    for (int c : rep.counts) rep.consistent = rep.consistent && c == rep.degree;
  }
  if (!rep.consistent && throw_on_inconsistent)
    throw Error(ErrorKind::DegreeInconsistent, "sample points disagree on the covering count");
  return rep;
}

struct EdgePointBound {
  int edge = 0;
  double y = 0.0;
  double dfdy2 = 0.0;  // |df/dy|^2 in the target metric
  double radius = 0.0;
  double bound = 0.0;  // 2 E / (pi r^2)
};

struct LipschitzProfile {
  double y_interior = 0.0;
  double sup_density = 0.0;
  double energy = 0.0;
  double ratio = 0.0;  // sup_density / energy
  std::vector<std::vector<double>> node_density;  // NaN outside the compact region
  std::vector<EdgePointBound> edge_points;
  bool edge_bound_holds = true;
};

/// Energy density |du|^2 with respect to the domain's hyperbolic area, on the
/// part of every face below level y_interior in each vertex local model, and
/// the half-disc gradient bound at edge nodes.
inline LipschitzProfile lipschitz_profile(const SimplicialMap& u, double y_interior, double total_energy) {
  const ComplexMesh& m = *u.mesh;
  LipschitzProfile out;
  out.y_interior = y_interior;
  out.energy = total_energy;
  std::vector<std::vector<std::vector<int>>> nt;
  for (std::size_t t = 0; t < m.faces.size(); ++t) {
    const FaceMesh& f = m.faces[t];
    nt.push_back(detail::node_triangles(f));
    std::vector<double> tri_density;
    for (const Tri& tr : f.triangles) {
      const auto p = detail::tri_nodes(f, tr);
      const auto q = detail::tri_images(u, static_cast<int>(t), tr);
      const TriGeom g = tri_geom(p[0], p[1], p[2]);
      const Mat2 j = detail::affine_jacobian(g, q);
      const double vc = (q[0].y + q[1].y + q[2].y) / 3.0;
      const double d = (j.a * j.a + j.b * j.b + j.c * j.c + j.d * j.d) * g.centroid_y * g.centroid_y / (vc * vc);
      tri_density.push_back(d);
    }
    std::vector<double> nd(f.nodes.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < f.nodes.size(); ++i) {
      bool inside = true;
      for (int c = 0; c < 3 && inside; ++c)
        inside = corner_level(c, f.nodes[i].p) * m.corner_scales[t][c] <= y_interior;
      if (!inside || nt[t][i].empty()) continue;
      double s = 0.0;
      for (int k : nt[t][i]) s += tri_density[k];
      nd[i] = s / nt[t][i].size();
      out.sup_density = std::max(out.sup_density, nd[i]);
    }
    out.node_density.push_back(std::move(nd));
  }
  out.ratio = total_energy > 0.0 ? out.sup_density / total_energy : 0.0;

  for (std::size_t k = 0; k < m.edge_nodes.size(); ++k) {
    const EdgeNodeClass& cls = m.edge_nodes[k];
    if (cls.fixed) continue;
    const auto range = m.edge_range[cls.edge];
    double r = std::min(cls.y - range[0], range[1] - cls.y);
    for (double rj : m.edge_models[cls.edge].scales)
      r = std::min(r, std::sqrt(cls.y * cls.y + 0.25 * rj * rj) - 0.5 * rj);
    r *= 0.5;
    if (!(r > 0.0)) continue;
    EdgePointBound b;
    b.edge = cls.edge;
    b.y = cls.y;
    b.radius = r;
    b.bound = 2.0 * total_energy / (std::numbers::pi * r * r);
    const double v = std::exp(u.edge_logy[k]);
    for (const auto& [face, local] : cls.members) {
      const Mat2 df = edge_member_jacobian(u, face, local, nt[face]);
      b.dfdy2 = std::max(b.dfdy2, (df.b * df.b + df.d * df.d) / (v * v));
    }
    out.edge_bound_holds = out.edge_bound_holds && b.dfdy2 <= b.bound;
    out.edge_points.push_back(b);
  }
  return out;
}

struct DiagnoseConfig {
  std::uint64_t seed = 12345;
  int degree_samples_per_face = 25;
  double y_interior = 0.0;  // 0 selects half the cut level
  Quadrature quadrature = Quadrature::Exact;
};

struct DiagnosticsReport {
  double energy = 0.0;
  double hopf_dbar_norm = 0.0;
  std::vector<double> hopf_dbar_per_face;
  double hopf_max_abs = 0.0;   // raw coefficient in the face charts
  double hopf_max_norm = 0.0;  // |phi| y^2, the pointwise hyperbolic norm
  std::vector<EdgeBalance> edges;
  std::vector<double> pde_residual;  // per face
  DegreeReport degree;
  std::vector<double> min_jacobian;  // per face
  LipschitzProfile lipschitz;
  std::uint64_t seed = 0;
};

inline DiagnosticsReport diagnose(const SimplicialMap& u, const DiagnoseConfig& cfg = {}) {
  const ComplexMesh& m = *u.mesh;
  DiagnosticsReport rep;
  rep.seed = cfg.seed;
  const MeshGeometry geom = MeshGeometry::build(m);
  rep.energy = energy(u, geom, cfg.quadrature).total;
  double dbar2 = 0.0;
  for (std::size_t t = 0; t < m.faces.size(); ++t) {
    const HopfField h = hopf(u, static_cast<int>(t));
    for (std::size_t k = 0; k < h.phi.size(); ++k) {
      const Tri& tr = h.triangles[k];
      const double yc = (h.nodes[tr[0]].y + h.nodes[tr[1]].y + h.nodes[tr[2]].y) / 3.0;
      rep.hopf_max_abs = std::max(rep.hopf_max_abs, std::abs(h.phi[k]));
      rep.hopf_max_norm = std::max(rep.hopf_max_norm, std::abs(h.phi[k]) * yc * yc);
    }
    const double r = holomorphy_residual(h).norm;
    rep.hopf_dbar_per_face.push_back(r);
    dbar2 += r * r;
    rep.pde_residual.push_back(pde_residual(u, static_cast<int>(t)).norm);
    double mj = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m.faces[t].triangles.size(); ++k) {
      const auto q = detail::tri_images(u, static_cast<int>(t), m.faces[t].triangles[k]);
      mj = std::min(mj, detail::affine_jacobian(geom.tris[t][k], q).det());
    }
    rep.min_jacobian.push_back(mj);
  }
  rep.hopf_dbar_norm = std::sqrt(dbar2);
  std::vector<std::vector<std::vector<int>>> nt;
  for (const FaceMesh& f : m.faces) nt.push_back(detail::node_triangles(f));
  const DofMap d = DofMap::build(m);
  const Eigen::VectorXd g = energy_gradient(u, d, geom, cfg.quadrature);
  for (int e = 0; e < m.complex.num_edges(); ++e) rep.edges.push_back(edge_balance(u, e, nt, g, d));
  rep.degree = degree_estimate(u, cfg.degree_samples_per_face, cfg.seed, false);
  const double yi = cfg.y_interior > 0.0 ? cfg.y_interior : 0.5 * m.cut_level;
  rep.lipschitz = lipschitz_profile(u, yi, rep.energy);
  return rep;
}

}  // namespace ihm
