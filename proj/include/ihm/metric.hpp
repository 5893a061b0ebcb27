#pragma once

// Ideal hyperbolic structures on a complex, encoded by shift parameters.
//
// For an edge with slots 1..n the stored values are alpha_{j,1} (j = 2..n),
// with alpha_{k,j} = log(r_j / r_k) for the scales r_j of the edge local model.
// We write rho_j = log r_j up to a per-edge constant, so rho_1 = 0 and
// rho_j = -alpha_{j,1}.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "ihm/complex.hpp"
#include "ihm/errors.hpp"

namespace ihm {

struct IdealMetric {
  std::vector<std::vector<double>> shifts;  // per edge, alpha_{j,1} for j = 2..deg

  static IdealMetric zero(const Complex& c) {
    IdealMetric m;
    for (const Edge& e : c.edges()) m.shifts.emplace_back(e.degree() - 1, 0.0);
    return m;
  }

  int size() const {
    int n = 0;
    for (const auto& s : shifts) n += static_cast<int>(s.size());
    return n;
  }

  Eigen::VectorXd flat() const {
    Eigen::VectorXd v(size());
    int k = 0;
    for (const auto& s : shifts)
      for (double a : s) v[k++] = a;
    return v;
  }

  static IdealMetric from_flat(const Complex& c, const Eigen::VectorXd& v) {
    IdealMetric m = zero(c);
    int k = 0;
    for (auto& s : m.shifts)
      for (double& a : s) a = v[k++];
    return m;
  }

  /// Unnormalized log-scale of slot j of edge e.
  double log_scale(int e, int j) const { return j == 0 ? 0.0 : -shifts[e][j - 1]; }
};

/// Checks that the metric has the right shape for the complex.
inline void check_metric(const Complex& c, const IdealMetric& m) {
  if (static_cast<int>(m.shifts.size()) != c.num_edges())
    throw Error(ErrorKind::InvalidSpec, "metric lists " + std::to_string(m.shifts.size()) +
                                            " edges, complex has " +
                                            std::to_string(c.num_edges()));
  for (const Edge& e : c.edges()) {
    if (static_cast<int>(m.shifts[e.id].size()) != e.degree() - 1)
      throw Error(ErrorKind::InvalidSpec,
                  "edge " + std::to_string(e.id) + " needs " + std::to_string(e.degree() - 1) +
                      " shifts");
    for (double a : m.shifts[e.id])
      if (!std::isfinite(a))
        throw Error(ErrorKind::InvalidSpec, "non-finite shift on edge " + std::to_string(e.id));
  }
}

/// alpha(k, j) = log(r_j / r_k) for all slot pairs of edge e.
inline Eigen::MatrixXd full_shift_table(const Complex& c, const IdealMetric& m, int e) {
  const int n = c.edge(e).degree();
  Eigen::MatrixXd a(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      // alpha_{k,j} = alpha_{k,1} + alpha_{1,j}
      const double ak1 = k == 0 ? 0.0 : m.shifts[e][k - 1];
      const double a1j = j == 0 ? 0.0 : -m.shifts[e][j - 1];
      a(k, j) = k == j ? 0.0 : ak1 + a1j;
    }
  return a;
}

struct EdgeLocalModel {
  int edge = 0;
  std::vector<double> scales;  // per slot, max is exactly 1
};

inline EdgeLocalModel edge_local_model(const Complex& c, const IdealMetric& m, int e) {
  EdgeLocalModel model;
  model.edge = e;
  const int n = c.edge(e).degree();
  double top = 0.0;
  for (int j = 0; j < n; ++j) top = std::max(top, m.log_scale(e, j));
  for (int j = 0; j < n; ++j)
    model.scales.push_back(m.log_scale(e, j) == top ? 1.0 : std::exp(m.log_scale(e, j) - top));
  return model;
}

struct CompletenessResidual {
  int vertex = 0;
  int cycle = 0;
  double residual = 0.0;
};

/// Signed weight of a link arc traversed from nodes[0] to nodes[1].
inline double arc_weight(const Complex& c, const IdealMetric& m, const LinkGraph& g,
                         const LinkGraph::Arc& a) {
  double w = 0.0;
  for (int i = 0; i < 2; ++i) {
    const auto& node = g.nodes[a.nodes[i]];
    const double rho = m.log_scale(node.edge, a.slot_positions[i]);
    w += (i == 0 ? 1.0 : -1.0) * node.sign * rho;
  }
  (void)c;
  return w;
}

inline double cycle_residual(const Complex& c, const IdealMetric& m, const LinkGraph& g,
                             const LinkCycle& cyc) {
  double s = 0.0;
  for (const OrientedArc& oa : cyc) {
    const double w = arc_weight(c, m, g, g.arcs[oa.arc]);
    s += oa.forward ? w : -w;
  }
  return s;
}

inline std::vector<CompletenessResidual> completeness_residuals(const Complex& c,
                                                                const IdealMetric& m) {
  check_metric(c, m);
  std::vector<CompletenessResidual> out;
  for (int v = 0; v < c.num_vertices(); ++v) {
    const LinkGraph g = link_graph(c, v);
    const CycleBasis basis = cycle_basis(g);
    for (std::size_t k = 0; k < basis.cycles.size(); ++k)
      out.push_back({v, static_cast<int>(k), cycle_residual(c, m, g, basis.cycles[k])});
  }
  return out;
}

inline double max_abs_residual(const std::vector<CompletenessResidual>& r) {
  double s = 0.0;
  for (const auto& x : r) s = std::max(s, std::abs(x.residual));
  return s;
}

/// Linear map from the stored shift vector to the completeness residuals.
inline Eigen::MatrixXd residual_matrix(const Complex& c) {
  const IdealMetric z = IdealMetric::zero(c);
  const int n = z.size();
  const int rows = static_cast<int>(completeness_residuals(c, z).size());
  Eigen::MatrixXd R(rows, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[k] = 1.0;
    const auto r = completeness_residuals(c, IdealMetric::from_flat(c, e));
    for (int i = 0; i < rows; ++i) R(i, k) = r[i].residual;
  }
  return R;
}

/// Least-squares projection of the stored shifts onto the complete metrics.
inline IdealMetric project_complete(const Complex& c, const IdealMetric& m) {
  const Eigen::MatrixXd R = residual_matrix(c);
  const Eigen::VectorXd x = m.flat();
  if (R.rows() == 0 || x.size() == 0) return m;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(R);
  const Eigen::VectorXd y = x - cod.solve(R * x);
  // One refinement pass; the residual of a projected metric should sit at rounding level.
  const Eigen::VectorXd z = y - cod.solve(R * y);
  return IdealMetric::from_flat(c, z);
}

/// Shifts i.i.d. uniform in [-1, 1], optionally projected to a complete metric.
template <class Rng>
IdealMetric random_metric(const Complex& c, Rng& rng, bool complete) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  IdealMetric m = IdealMetric::zero(c);
  for (auto& s : m.shifts)
    for (double& a : s) a = u(rng);
  return complete ? project_complete(c, m) : m;
}

struct Dims {
  int metric_dim = 0;
  int relation_count = 0;
  int teich_dim = 0;
  int closed_form = 0;            // E - V
  bool closed_form_applies = true;  // every link connected with a cycle
};

inline Dims dims(const Complex& c) {
  Dims d;
  for (const Edge& e : c.edges()) d.metric_dim += e.degree() - 1;
  for (int v = 0; v < c.num_vertices(); ++v) {
    const CycleBasis b = cycle_basis(link_graph(c, v));
    d.relation_count += static_cast<int>(b.cycles.size());
    if (b.components != 1 || b.cycles.empty()) d.closed_form_applies = false;
  }
  d.teich_dim = d.metric_dim - d.relation_count;
  d.closed_form = c.num_edges() - c.num_vertices();
  return d;
}

/// Development of the faces around a vertex. Each corner (face at v) is
/// placed in the vertex chart as z -> r w + t, or z -> -r conj(w) + t when
/// flipped, where w is the corner chart of that face corner (v at infinity,
/// left side x = 0, right side x = 1).
struct VertexLocalModel {
  struct Placement {
    Corner corner;
    double scale = 1.0;
    double translation = 0.0;
    bool flipped = false;
  };
  int vertex = 0;
  std::vector<Placement> corners;  // same order as link_graph arcs
  double max_mismatch = 0.0;       // log-scale mismatch over co-tree arcs
  std::vector<double> holonomy;    // translation defect per co-tree closure

  double scale_of(const Corner& k) const {
    for (const auto& p : corners)
      if (p.corner == k) return p.scale;
    return 1.0;
  }
};

constexpr double kCompletenessTol = 1e-9;

inline VertexLocalModel vertex_local_model(const Complex& c, const IdealMetric& m, int v,
                                           double tol = kCompletenessTol) {
  check_metric(c, m);
  const LinkGraph g = link_graph(c, v);
  const int nn = static_cast<int>(g.nodes.size());
  const int na = static_cast<int>(g.arcs.size());

  // ell(arc) = sign(z) * rho(slot of arc at z) + k(z): solve for node offsets k
  // by a spanning tree, then test co-tree arcs.
  std::vector<std::vector<int>> incident(nn);
  for (int a = 0; a < na; ++a) {
    incident[g.arcs[a].nodes[0]].push_back(a);
    if (g.arcs[a].nodes[1] != g.arcs[a].nodes[0]) incident[g.arcs[a].nodes[1]].push_back(a);
  }
  auto term = [&](int a, int i) {
    const auto& arc = g.arcs[a];
    const auto& node = g.nodes[arc.nodes[i]];
    return node.sign * m.log_scale(node.edge, arc.slot_positions[i]);
  };

  std::vector<double> offset(nn, 0.0), ell(na, 0.0);
  std::vector<char> node_done(nn, 0), arc_done(na, 0);
  // Placement data: side position X of each node's vertical line, and the side
  // on which the arc's face lies when propagating.
  std::vector<double> trans(na, 0.0);
  std::vector<char> flip(na, 0);
  VertexLocalModel model;
  model.vertex = v;

  // Horizontal position of the side of arc a at endpoint i in the vertex chart.
  auto side_x = [&](int a, int i) {
    const auto& arc = g.arcs[a];
    const double r = std::exp(ell[a]);
    const bool left = arc.sides[i] == arc.corner.corner;  // side c is x = 0 of the corner chart
    const double w = left ? 0.0 : 1.0;
    return flip[a] ? -r * w + trans[a] : r * w + trans[a];
  };
  // +1 when the face of arc a lies to the right of its side at endpoint i.
  auto side_dir = [&](int a, int i) {
    const bool left = g.arcs[a].sides[i] == g.arcs[a].corner.corner;
    const int d = left ? 1 : -1;
    return flip[a] ? -d : d;
  };

  for (int root = 0; root < nn; ++root) {
    if (node_done[root]) continue;
    node_done[root] = 1;
    std::vector<int> queue{root};
    bool first_arc = true;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int z = queue[q];
      // Reference arc already placed at z, if any.
      int ref = -1, ref_end = 0;
      for (int a : incident[z])
        if (arc_done[a]) {
          ref = a;
          ref_end = g.arcs[a].nodes[0] == z ? 0 : 1;
          break;
        }
      for (int a : incident[z]) {
        if (arc_done[a]) continue;
        const int i = g.arcs[a].nodes[0] == z ? 0 : 1;
        ell[a] = term(a, i) + offset[z];
        if (first_arc) {
          trans[a] = 0.0;
          flip[a] = 0;
          first_arc = false;
        } else {
          // Place a on the far side of the reference face's line at z.
          const double X = side_x(ref, ref_end);
          const int want = -side_dir(ref, ref_end);
          flip[a] = 0;
          if (side_dir(a, i) != want) flip[a] = 1;
          trans[a] = 0.0;
          trans[a] = X - side_x(a, i);
        }
        arc_done[a] = 1;
        if (ref < 0) {
          ref = a;
          ref_end = i;
        }
        const int j = 1 - i;
        const int w = g.arcs[a].nodes[j];
        if (!node_done[w]) {
          node_done[w] = 1;
          offset[w] = ell[a] - term(a, j);
          queue.push_back(w);
        } else {
          const double mismatch = ell[a] - (term(a, j) + offset[w]);
          model.max_mismatch = std::max(model.max_mismatch, std::abs(mismatch));
          // Translation defect of this closure relative to the tree placement.
          double hol = 0.0;
          for (int b : incident[w])
            if (b != a && arc_done[b]) {
              const int bi = g.arcs[b].nodes[0] == w ? 0 : 1;
              hol = side_x(a, j) - side_x(b, bi);
              break;
            }
          model.holonomy.push_back(hol);
        }
      }
    }
  }
  if (model.max_mismatch > tol)
    throw Error(ErrorKind::IncompleteAtVertex,
                "vertex " + std::to_string(v) + " mismatch " + std::to_string(model.max_mismatch));

  double top = -INFINITY;
  for (double l : ell) top = std::max(top, l);
  for (int a = 0; a < na; ++a) {
    const double s = ell[a] == top ? 1.0 : std::exp(ell[a] - top);
    model.corners.push_back({g.arcs[a].corner, s, trans[a] * std::exp(-top), flip[a] != 0});
  }
  return model;
}

/// Vertex models for every vertex; IncompleteMetric if any fails.
inline std::vector<VertexLocalModel> vertex_local_models(const Complex& c, const IdealMetric& m) {
  std::vector<VertexLocalModel> out;
  for (int v = 0; v < c.num_vertices(); ++v) {
    try {
      out.push_back(vertex_local_model(c, m, v));
    } catch (const Error& e) {
      throw Error(ErrorKind::IncompleteMetric, e.what());
    }
  }
  return out;
}

}  // namespace ihm
