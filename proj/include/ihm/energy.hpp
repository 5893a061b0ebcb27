#pragma once

// Simplicial maps between two ideal structures on the same complex, and the
// piecewise-linear harmonic energy with the hyperbolic target metric.
//
// Domain and target points are both written in the reference chart of their
// face. On a mesh triangle with domain area A and affine image f = (f1, f2),
//   E_T = (|grad f1|^2 + |grad f2|^2) * int_T f2^-2 dA,
// which does not depend on the conformal factor of the domain metric.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "ihm/charts.hpp"
#include "ihm/divided_difference.hpp"
#include "ihm/errors.hpp"
#include "ihm/mesh.hpp"
#include "ihm/metric.hpp"

namespace ihm {

enum class Quadrature { Exact, OnePoint };
enum class DomainDensity { Euclidean, Hyperbolic };

/// Fixed per-triangle geometry of the domain mesh.
struct TriGeom {
  double area = 0.0;                    // Euclidean, reference chart
  std::array<std::array<double, 2>, 3> grad{};  // gradients of the barycentric basis
  double centroid_y = 1.0;
};

inline TriGeom tri_geom(const UHPoint& a, const UHPoint& b, const UHPoint& c) {
  TriGeom g;
  const double det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  g.area = 0.5 * det;
  g.grad[0] = {(b.y - c.y) / det, (c.x - b.x) / det};
  g.grad[1] = {(c.y - a.y) / det, (a.x - c.x) / det};
  g.grad[2] = {(a.y - b.y) / det, (b.x - a.x) / det};
  g.centroid_y = (a.y + b.y + c.y) / 3.0;
  return g;
}

/// Degree-of-freedom layout: two per free face node, one (log y') per free
/// edge-node class. Cut nodes and cut endpoints are fixed.
struct DofMap {
  std::vector<std::vector<int>> node;  // per face, per node: first dof or -1
  std::vector<int> edge;               // per edge-node class: dof or -1
  std::vector<std::vector<int>> face_dofs;  // interior dofs owned by each face
  int size = 0;

  static DofMap build(const ComplexMesh& m) {
    DofMap d;
    d.node.resize(m.faces.size());
    d.face_dofs.resize(m.faces.size());
    for (std::size_t t = 0; t < m.faces.size(); ++t) {
      const auto& nodes = m.faces[t].nodes;
      d.node[t].assign(nodes.size(), -1);
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const NodeKind k = nodes[i].kind;
        if (k == NodeKind::Interior || k == NodeKind::Seam || k == NodeKind::Center) {
          d.node[t][i] = d.size;
          d.face_dofs[t].push_back(d.size);
          d.face_dofs[t].push_back(d.size + 1);
          d.size += 2;
        }
      }
    }
    d.edge.assign(m.edge_nodes.size(), -1);
    for (std::size_t k = 0; k < m.edge_nodes.size(); ++k)
      if (!m.edge_nodes[k].fixed) d.edge[k] = d.size++;
    return d;
  }
};

/// Discrete simplicial map: per-node images in the target reference charts;
/// edge nodes move along their edge through one shared log-height per class.
struct SimplicialMap {
  std::shared_ptr<const ComplexMesh> mesh;
  IdealMetric tau;
  std::vector<EdgeLocalModel> tau_edges;
  std::vector<std::array<double, 3>> tau_corner_scales;
  std::vector<std::vector<UHPoint>> image;  // per face, per node
  std::vector<double> edge_logy;            // per edge-node class, log y' in the tau edge model

  /// Target position of an edge node with tau edge-model height y'.
  UHPoint edge_image(int face, int local, double logy) const {
    const MeshNode& n = mesh->faces[face].nodes[local];
    const Slot& s = mesh->complex.slot(face, n.side);
    const int e = mesh->complex.edge_of(face, n.side);
    const int j = mesh->complex.slot_position(face, n.side);
    const double sv = std::exp(logy) / tau_edges[e].scales[j];
    UHPoint p = slot_chart(s).inverse()(UHPoint{0.0, sv});
    if (n.side == 2) p.x = 0.0;
    if (n.side == 1) p.x = 1.0;
    return p;
  }

  /// d(image)/d(log y') for an edge node at the current height.
  std::array<double, 2> edge_tangent(int face, int local) const {
    const MeshNode& n = mesh->faces[face].nodes[local];
    const Slot& s = mesh->complex.slot(face, n.side);
    const int e = mesh->complex.edge_of(face, n.side);
    const int j = mesh->complex.slot_position(face, n.side);
    const double sv = std::exp(edge_logy[n.edge_node]) / tau_edges[e].scales[j];
    const Isometry inv = slot_chart(s).inverse();
    const Mat2 J = inv.jacobian(Cplx(0.0, sv));
    return {J.b * sv, J.d * sv};
  }

  void sync_edges() {
    for (std::size_t k = 0; k < mesh->edge_nodes.size(); ++k)
      for (const auto& [face, local] : mesh->edge_nodes[k].members)
        image[face][local] = edge_image(face, local, edge_logy[k]);
  }

  Eigen::VectorXd dofs(const DofMap& d) const {
    Eigen::VectorXd x(d.size);
    for (std::size_t t = 0; t < image.size(); ++t)
      for (std::size_t i = 0; i < image[t].size(); ++i)
        if (d.node[t][i] >= 0) {
          x[d.node[t][i]] = image[t][i].x;
          x[d.node[t][i] + 1] = image[t][i].y;
        }
    for (std::size_t k = 0; k < d.edge.size(); ++k)
      if (d.edge[k] >= 0) x[d.edge[k]] = edge_logy[k];
    return x;
  }

  void set_dofs(const DofMap& d, const Eigen::VectorXd& x) {
    for (std::size_t t = 0; t < image.size(); ++t)
      for (std::size_t i = 0; i < image[t].size(); ++i)
        if (d.node[t][i] >= 0) image[t][i] = {x[d.node[t][i]], x[d.node[t][i] + 1]};
    for (std::size_t k = 0; k < d.edge.size(); ++k)
      if (d.edge[k] >= 0) edge_logy[k] = x[d.edge[k]];
    sync_edges();
  }
};

/// Per-triangle energy pieces shared by energy, gradient and diagnostics.
struct TriEnergy {
  double energy = 0.0;
  double weight = 0.0;   // int_T f2^-2 dA
  double dirichlet = 0.0;  // |grad f1|^2 + |grad f2|^2
  std::array<double, 2> gf1{}, gf2{};  // gradients of f1, f2
  double jacobian = 0.0;  // det Df
};

inline TriEnergy tri_energy(const TriGeom& g, const std::array<UHPoint, 3>& q,
                            Quadrature quad = Quadrature::Exact,
                            DomainDensity density = DomainDensity::Euclidean) {
  TriEnergy r;
  for (int i = 0; i < 3; ++i) {
    r.gf1[0] += q[i].x * g.grad[i][0];
    r.gf1[1] += q[i].x * g.grad[i][1];
    r.gf2[0] += q[i].y * g.grad[i][0];
    r.gf2[1] += q[i].y * g.grad[i][1];
  }
  r.dirichlet = r.gf1[0] * r.gf1[0] + r.gf1[1] * r.gf1[1] + r.gf2[0] * r.gf2[0] + r.gf2[1] * r.gf2[1];
  r.jacobian = r.gf1[0] * r.gf2[1] - r.gf1[1] * r.gf2[0];
  if (quad == Quadrature::Exact) {
    r.weight = 2.0 * g.area * neglog_dd(std::array<double, 3>{q[0].y, q[1].y, q[2].y});
  } else {
    const double vc = (q[0].y + q[1].y + q[2].y) / 3.0;
    r.weight = g.area / (vc * vc);
  }
  if (density == DomainDensity::Hyperbolic) {
    // |grad f|^2_g dmu_g with g = y^-2 (dx^2 + dy^2) taken at the centroid.
    const double lam2 = 1.0 / (g.centroid_y * g.centroid_y);
    r.energy = (r.dirichlet / lam2) * (r.weight * lam2);
  } else {
    r.energy = r.dirichlet * r.weight;
  }
  return r;
}

/// d E_T / d q_i for the three image points.
inline std::array<std::array<double, 2>, 3> tri_energy_grad(const TriGeom& g,
                                                            const std::array<UHPoint, 3>& q,
                                                            const TriEnergy& te,
                                                            Quadrature quad = Quadrature::Exact) {
  std::array<std::array<double, 2>, 3> out{};
  for (int i = 0; i < 3; ++i) {
    const double d1 = g.grad[i][0] * te.gf1[0] + g.grad[i][1] * te.gf1[1];
    const double d2 = g.grad[i][0] * te.gf2[0] + g.grad[i][1] * te.gf2[1];
    double dw;
    if (quad == Quadrature::Exact) {
      dw = 2.0 * g.area * neglog_dd(std::array<double, 4>{q[0].y, q[1].y, q[2].y, q[i].y});
    } else {
      const double vc = (q[0].y + q[1].y + q[2].y) / 3.0;
      dw = -2.0 * g.area / (3.0 * vc * vc * vc);
    }
    out[i][0] = 2.0 * te.weight * d1;
    out[i][1] = 2.0 * te.weight * d2 + te.dirichlet * dw;
  }
  return out;
}

/// Cached domain geometry of a mesh.
struct MeshGeometry {
  std::vector<std::vector<TriGeom>> tris;

  static MeshGeometry build(const ComplexMesh& m) {
    MeshGeometry g;
    for (const FaceMesh& f : m.faces) {
      std::vector<TriGeom> v;
      v.reserve(f.triangles.size());
      for (const Tri& t : f.triangles) v.push_back(tri_geom(f.nodes[t[0]].p, f.nodes[t[1]].p, f.nodes[t[2]].p));
      g.tris.push_back(std::move(v));
    }
    return g;
  }
};

struct EnergyReport {
  double total = 0.0;
  std::vector<double> per_face;
  std::vector<double> trace;      // objective value per accepted iteration
  std::vector<double> energy_trace;
  std::vector<double> jacobian_trace;  // min image-triangle Jacobian per entry
  double stationarity = 0.0;
  char mode = 'W';
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
  double min_jacobian = 0.0;
};

inline void check_images(const SimplicialMap& u) {
  for (std::size_t t = 0; t < u.image.size(); ++t)
    for (const UHPoint& p : u.image[t])
      if (!(p.y > 0.0))
        throw Error(ErrorKind::InvalidTarget, "node image with non-positive height in face " +
                                                  std::to_string(t));
}

inline double face_energy(const SimplicialMap& u, const MeshGeometry& g, int t,
                          Quadrature quad = Quadrature::Exact,
                          DomainDensity density = DomainDensity::Euclidean) {
  const FaceMesh& f = u.mesh->faces[t];
  double e = 0.0;
  for (std::size_t k = 0; k < f.triangles.size(); ++k) {
    const Tri& tr = f.triangles[k];
    e += tri_energy(g.tris[t][k], {u.image[t][tr[0]], u.image[t][tr[1]], u.image[t][tr[2]]}, quad,
                    density)
             .energy;
  }
  return e;
}

inline EnergyReport energy(const SimplicialMap& u, const MeshGeometry& g,
                           Quadrature quad = Quadrature::Exact,
                           DomainDensity density = DomainDensity::Euclidean) {
  check_images(u);
  EnergyReport r;
  double mj = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < u.image.size(); ++t) {
    r.per_face.push_back(face_energy(u, g, static_cast<int>(t), quad, density));
    r.total += r.per_face.back();
    const FaceMesh& f = u.mesh->faces[t];
    for (const Tri& tr : f.triangles) {
      const TriGeom tg = tri_geom(f.nodes[tr[0]].p, f.nodes[tr[1]].p, f.nodes[tr[2]].p);
      const auto te = tri_energy(tg, {u.image[t][tr[0]], u.image[t][tr[1]], u.image[t][tr[2]]}, quad);
      mj = std::min(mj, te.jacobian);
    }
  }
  r.min_jacobian = mj;
  return r;
}

/// Gradient of the energy with respect to every node image (per face, per node).
inline std::vector<std::vector<std::array<double, 2>>> node_gradient(
    const SimplicialMap& u, const MeshGeometry& g, Quadrature quad = Quadrature::Exact) {
  std::vector<std::vector<std::array<double, 2>>> out(u.image.size());
  for (std::size_t t = 0; t < u.image.size(); ++t) {
    const FaceMesh& f = u.mesh->faces[t];
    out[t].assign(f.nodes.size(), {0.0, 0.0});
    for (std::size_t k = 0; k < f.triangles.size(); ++k) {
      const Tri& tr = f.triangles[k];
      const std::array<UHPoint, 3> q{u.image[t][tr[0]], u.image[t][tr[1]], u.image[t][tr[2]]};
      const TriEnergy te = tri_energy(g.tris[t][k], q, quad);
      const auto gr = tri_energy_grad(g.tris[t][k], q, te, quad);
      for (int i = 0; i < 3; ++i) {
        out[t][tr[i]][0] += gr[i][0];
        out[t][tr[i]][1] += gr[i][1];
      }
    }
  }
  return out;
}

/// Chain rule from node gradients to the free DOFs.
inline Eigen::VectorXd assemble_gradient(const SimplicialMap& u, const DofMap& d,
                                         const std::vector<std::vector<std::array<double, 2>>>& ng) {
  Eigen::VectorXd gvec = Eigen::VectorXd::Zero(d.size);
  for (std::size_t t = 0; t < ng.size(); ++t)
    for (std::size_t i = 0; i < ng[t].size(); ++i)
      if (d.node[t][i] >= 0) {
        gvec[d.node[t][i]] += ng[t][i][0];
        gvec[d.node[t][i] + 1] += ng[t][i][1];
      }
  for (std::size_t k = 0; k < d.edge.size(); ++k) {
    if (d.edge[k] < 0) continue;
    double s = 0.0;
    for (const auto& [face, local] : u.mesh->edge_nodes[k].members) {
      const auto tan = u.edge_tangent(face, local);
      s += ng[face][local][0] * tan[0] + ng[face][local][1] * tan[1];
    }
    gvec[d.edge[k]] = s;
  }
  return gvec;
}

inline Eigen::VectorXd energy_gradient(const SimplicialMap& u, const DofMap& d,
                                       const MeshGeometry& g, Quadrature quad = Quadrature::Exact) {
  check_images(u);
  return assemble_gradient(u, d, node_gradient(u, g, quad));
}

/// Per-face share of the derivative along one edge-node class.
inline std::vector<double> edge_dof_face_contributions(const SimplicialMap& u, const MeshGeometry& g,
                                                       int cls, Quadrature quad = Quadrature::Exact) {
  const auto ng = node_gradient(u, g, quad);
  std::vector<double> out;
  for (const auto& [face, local] : u.mesh->edge_nodes[cls].members) {
    const auto tan = u.edge_tangent(face, local);
    out.push_back(ng[face][local][0] * tan[0] + ng[face][local][1] * tan[1]);
  }
  return out;
}

/// Closed target face in the reference chart.
inline bool in_closed_face(const UHPoint& p, double tol = 1e-12) {
  return p.y > 0.0 && p.x >= -tol && p.x <= 1.0 + tol &&
         std::hypot(p.x - 0.5, p.y) >= 0.5 - tol;
}

namespace detail {

// Positions of a face's nodes after extending the boundary displacement with
// mean value weights. The extension is done in Klein coordinates, where the
// face is a Euclidean triangle with straight sides; the weights are positive
// and reproduce linear functions, so the result is a convex-combination map.
inline std::vector<UHPoint> harmonic_extension(const FaceMesh& f,
                                               const std::vector<UHPoint>& boundary_image,
                                               const std::vector<char>& is_free) {
  const int n = static_cast<int>(f.nodes.size());
  std::vector<int> idx(n, -1);
  int m = 0;
  for (int i = 0; i < n; ++i)
    if (is_free[i]) idx[i] = m++;
  std::vector<UHPoint> out = boundary_image;
  if (m == 0) return out;
  std::vector<std::array<double, 2>> k(n);
  for (int i = 0; i < n; ++i) k[i] = to_klein(f.nodes[i].p);
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m, 2);
  const auto add = [&](int i, int j, double w) {
    if (idx[i] < 0) return;
    trip.emplace_back(idx[i], idx[i], w);
    if (idx[j] >= 0) {
      trip.emplace_back(idx[i], idx[j], -w);
    } else {
      const auto kj = to_klein(boundary_image[j]);
      rhs(idx[i], 0) += w * (kj[0] - k[j][0]);
      rhs(idx[i], 1) += w * (kj[1] - k[j][1]);
    }
  };
  for (const Tri& t : f.triangles) {
    for (int s = 0; s < 3; ++s) {
      const int i = t[s], j = t[(s + 1) % 3], o = t[(s + 2) % 3];
      const double ux = k[j][0] - k[i][0], uy = k[j][1] - k[i][1];
      const double vx = k[o][0] - k[i][0], vy = k[o][1] - k[i][1];
      const double lu = std::hypot(ux, uy), lv = std::hypot(vx, vy);
      const double half = 0.5 * std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
      add(i, j, std::tan(half) / lu);
      add(i, o, std::tan(half) / lv);
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  const Eigen::MatrixXd disp = lu.solve(rhs);
  for (int i = 0; i < n; ++i)
    if (idx[i] >= 0) out[i] = from_klein({k[i][0] + disp(idx[i], 0), k[i][1] + disp(idx[i], 1)});
  return out;
}

}  // namespace detail

/// Image of a reference-chart point under the level rescaling of a cusp: the
/// identity in the coordinates of the two vertex local models.
inline UHPoint cusp_rescaled(const SimplicialMap& u, int t, int corner, const UHPoint& p) {
  const double ratio = u.mesh->corner_scales[t][corner] / u.tau_corner_scales[t][corner];
  if (ratio == 1.0) return p;
  const Isometry to = corner_chart(corner);
  UHPoint w = to(p);
  w.y *= ratio;
  return to.inverse()(w);
}

/// log(y'/y) forced by the cusp rescalings at the tail and head ends of an
/// edge, measured in the edge local model of its first slot.
inline std::array<double, 2> edge_end_shifts(const SimplicialMap& u, int e) {
  const ComplexMesh& m = *u.mesh;
  const Slot& s0 = m.complex.edge(e).slots.front();
  const double rs = m.edge_models[e].scales[0], rt = u.tau_edges[e].scales[0];
  const auto& cs = m.corner_scales[s0.triangle];
  const auto& ct = u.tau_corner_scales[s0.triangle];
  return {std::log((rt * ct[s0.tail_corner()]) / (rs * cs[s0.tail_corner()])),
          std::log((rt / ct[s0.head_corner()]) / (rs / cs[s0.head_corner()]))};
}

/// Discrete analogue of the map that is the identity in the coordinates of
/// the vertex local models near each cusp: cut nodes move by the level
/// rescaling of their corner, edge heights interpolate (in log y) between
/// the two rescalings at the cut endpoints, interior nodes follow by a
/// harmonic extension of the displacement.
inline SimplicialMap initial_map(std::shared_ptr<const ComplexMesh> mesh, const IdealMetric& tau) {
  const ComplexMesh& m = *mesh;
  const Complex& c = m.complex;
  SimplicialMap u;
  u.mesh = mesh;
  u.tau = tau;
  check_metric(c, tau);
  for (int e = 0; e < c.num_edges(); ++e) u.tau_edges.push_back(edge_local_model(c, tau, e));
  u.tau_corner_scales.assign(c.num_triangles(), {1.0, 1.0, 1.0});
  for (const auto& vm : vertex_local_models(c, tau))
    for (const auto& p : vm.corners) u.tau_corner_scales[p.corner.triangle][p.corner.corner] = p.scale;

  u.image.resize(m.faces.size());
  for (std::size_t t = 0; t < m.faces.size(); ++t) {
    u.image[t].resize(m.faces[t].nodes.size());
    for (std::size_t i = 0; i < m.faces[t].nodes.size(); ++i) {
      const MeshNode& n = m.faces[t].nodes[i];
      u.image[t][i] = n.p;
      if (n.kind == NodeKind::Cut) u.image[t][i] = cusp_rescaled(u, static_cast<int>(t), n.corner, n.p);
    }
  }

  u.edge_logy.resize(m.edge_nodes.size());
  for (std::size_t k = 0; k < m.edge_nodes.size(); ++k) {
    const EdgeNodeClass& cls = m.edge_nodes[k];
    const auto [d_tail, d_head] = edge_end_shifts(u, cls.edge);
    const auto range = m.edge_range[cls.edge];
    const double w = (std::log(cls.y) - std::log(range[0])) / (std::log(range[1]) - std::log(range[0]));
    const double delta = d_tail == 0.0 && d_head == 0.0 ? 0.0 : (1.0 - w) * d_tail + w * d_head;
    u.edge_logy[k] = std::log(cls.y) + delta;
  }
  // Edge images: reuse the mesh position exactly where nothing moves.
  for (std::size_t k = 0; k < m.edge_nodes.size(); ++k)
    for (const auto& [face, local] : m.edge_nodes[k].members) {
      const int e = m.edge_nodes[k].edge;
      const int j = c.slot_position(face, m.faces[face].nodes[local].side);
      const bool same = u.edge_logy[k] == std::log(m.edge_nodes[k].y) &&
                        u.tau_edges[e].scales[j] == m.edge_models[e].scales[j];
      u.image[face][local] = same ? m.faces[face].nodes[local].p : u.edge_image(face, local, u.edge_logy[k]);
    }

  for (std::size_t t = 0; t < m.faces.size(); ++t) {
    const FaceMesh& f = m.faces[t];
    std::vector<char> is_free(f.nodes.size(), 0);
    bool moved = false;
    for (std::size_t i = 0; i < f.nodes.size(); ++i) {
      const NodeKind k = f.nodes[i].kind;
      is_free[i] = k == NodeKind::Interior || k == NodeKind::Seam || k == NodeKind::Center;
      if (!is_free[i] && !(u.image[t][i] == f.nodes[i].p)) moved = true;
    }
    if (!moved) continue;
    u.image[t] = detail::harmonic_extension(f, u.image[t], is_free);
    for (std::size_t i = 0; i < f.nodes.size(); ++i) {
      if (!is_free[i]) continue;
      UHPoint& p = u.image[t][i];
      // Project into the closed face.
      p.x = std::clamp(p.x, 0.0, 1.0);
      const double r = std::hypot(p.x - 0.5, p.y);
      if (r < 0.5) {
        const double k = 0.5 / std::max(r, 1e-300);
        p = {0.5 + (p.x - 0.5) * k, p.y * k};
      }
    }
  }
  return u;
}

}  // namespace ihm
