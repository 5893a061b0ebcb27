#pragma once

// Minimization of the discrete energy: face sweeps (Dirichlet replacement on
// each face with its edge values frozen), edge sweeps (one-dimensional
// searches on each shared edge height) and a global preconditioned step.
// In mode D a log-barrier on the hyperbolic Jacobian of every image
// triangle keeps the per-face maps orientation preserving.

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "ihm/energy.hpp"

namespace ihm {

struct SolverConfig {
  int max_iterations = 200;
  // Stationarity is the predicted decrease g' H^-1 g / 2 of a full
  // preconditioned step; converged once it is below tol * objective.
  double tol = 1e-8;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  bool barrier = false;  // mode D
  double barrier_weight = 1e-3;
  double barrier_decay = 0.5;
  double barrier_floor = 1e-10;
  int face_steps = 2;
  int threads = 1;
  Quadrature quadrature = Quadrature::Exact;
  std::vector<double> schedule{2.0};
};

/// Objective pieces of a single triangle: energy plus weighted barrier.
struct TriObjective {
  double energy = 0.0;
  double barrier = 0.0;
  bool feasible = true;
};

namespace detail {

inline double hyperbolic_jacobian(const TriGeom& g, const std::array<UHPoint, 3>& q, double J) {
  const double vc = (q[0].y + q[1].y + q[2].y) / 3.0;
  return J * g.centroid_y * g.centroid_y / (vc * vc);
}

inline double barrier_area(const TriGeom& g) { return g.area / (g.centroid_y * g.centroid_y); }

}  // namespace detail

class Solver {
 public:
  Solver(SimplicialMap& u, const SolverConfig& cfg)
      : u_(u), cfg_(cfg), geom_(MeshGeometry::build(*u.mesh)), dofs_(DofMap::build(*u.mesh)) {
    mu_ = cfg.barrier ? cfg.barrier_weight : 0.0;
    build_node_map();
    build_edge_patches();
  }

  const DofMap& dofs() const { return dofs_; }
  const MeshGeometry& geometry() const { return geom_; }
  double mu() const { return mu_; }

  // ----- objective -----

  TriObjective tri_objective(int t, int k) const {
    const Tri& tr = u_.mesh->faces[t].triangles[k];
    const std::array<UHPoint, 3> q{u_.image[t][tr[0]], u_.image[t][tr[1]], u_.image[t][tr[2]]};
    TriObjective o;
    if (!(q[0].y > 0.0 && q[1].y > 0.0 && q[2].y > 0.0)) {
      o.feasible = false;
      return o;
    }
    const TriGeom& g = geom_.tris[t][k];
    const TriEnergy te = tri_energy(g, q, cfg_.quadrature);
    o.energy = te.energy;
    if (mu_ > 0.0) {
      const double jh = detail::hyperbolic_jacobian(g, q, te.jacobian);
      if (!(jh > 0.0)) {
        o.feasible = false;
        return o;
      }
      o.barrier = detail::barrier_area(g) * (jh - 1.0 - std::log(jh));
    }
    return o;
  }

  bool face_nodes_feasible(int t) const {
    const auto& nodes = dofs_.node[t];
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] >= 0 && !in_closed_face(u_.image[t][i])) return false;
    return true;
  }

  double face_objective(int t) const {
    if (!face_nodes_feasible(t)) return kInf;
    double s = 0.0;
    for (std::size_t k = 0; k < u_.mesh->faces[t].triangles.size(); ++k) {
      const TriObjective o = tri_objective(t, static_cast<int>(k));
      if (!o.feasible) return kInf;
      s += o.energy + mu_ * o.barrier;
    }
    return s;
  }

  double objective() const {
    double s = 0.0;
    for (int t = 0; t < num_faces(); ++t) {
      const double f = face_objective(t);
      if (f == kInf) return kInf;
      s += f;
    }
    return s;
  }

  double total_energy() const {
    double s = 0.0;
    for (int t = 0; t < num_faces(); ++t)
      for (std::size_t k = 0; k < u_.mesh->faces[t].triangles.size(); ++k)
        s += tri_objective(t, static_cast<int>(k)).energy;
    return s;
  }

  double min_jacobian() const {
    double m = kInf;
    for (int t = 0; t < num_faces(); ++t)
      for (std::size_t k = 0; k < u_.mesh->faces[t].triangles.size(); ++k) {
        const Tri& tr = u_.mesh->faces[t].triangles[k];
        const std::array<UHPoint, 3> q{u_.image[t][tr[0]], u_.image[t][tr[1]], u_.image[t][tr[2]]};
        const TriEnergy te = tri_energy(geom_.tris[t][k], q, cfg_.quadrature);
        m = std::min(m, detail::hyperbolic_jacobian(geom_.tris[t][k], q, te.jacobian));
      }
    return m;
  }

  /// Gradient of the objective with respect to every node image.
  std::vector<std::vector<std::array<double, 2>>> node_gradient() const {
    std::vector<std::vector<std::array<double, 2>>> out(num_faces());
    for (int t = 0; t < num_faces(); ++t) out[t] = face_node_gradient(t);
    return out;
  }

  std::vector<std::array<double, 2>> face_node_gradient(int t) const {
    const FaceMesh& f = u_.mesh->faces[t];
    std::vector<std::array<double, 2>> out(f.nodes.size(), {0.0, 0.0});
    for (std::size_t k = 0; k < f.triangles.size(); ++k) {
      const Tri& tr = f.triangles[k];
      const std::array<UHPoint, 3> q{u_.image[t][tr[0]], u_.image[t][tr[1]], u_.image[t][tr[2]]};
      const TriGeom& g = geom_.tris[t][k];
      const TriEnergy te = tri_energy(g, q, cfg_.quadrature);
      auto gr = tri_energy_grad(g, q, te, cfg_.quadrature);
      if (mu_ > 0.0) add_barrier_grad(g, q, te, gr);
      for (int i = 0; i < 3; ++i) {
        out[tr[i]][0] += gr[i][0];
        out[tr[i]][1] += gr[i][1];
      }
    }
    return out;
  }

  Eigen::VectorXd gradient() const { return assemble_gradient(u_, dofs_, node_gradient()); }

  // ----- preconditioner -----

  /// H = P' K P with K the stiffness of the current weights (plus the convex
  /// part of the weight curvature in the vertical direction).
  Eigen::SparseMatrix<double> preconditioner() const {
    std::vector<Eigen::Triplet<double>> trip;
    for (int t = 0; t < num_faces(); ++t) {
      const FaceMesh& f = u_.mesh->faces[t];
      std::vector<std::array<double, 2>> tangent(f.nodes.size(), {0.0, 0.0});
      for (std::size_t i = 0; i < f.nodes.size(); ++i)
        if (f.nodes[i].kind == NodeKind::Edge && dofs_.edge[f.nodes[i].edge_node] >= 0)
          tangent[i] = u_.edge_tangent(t, static_cast<int>(i));
      for (std::size_t k = 0; k < f.triangles.size(); ++k) {
        const Tri& tr = f.triangles[k];
        const std::array<UHPoint, 3> q{u_.image[t][tr[0]], u_.image[t][tr[1]], u_.image[t][tr[2]]};
        const TriGeom& g = geom_.tris[t][k];
        const TriEnergy te = tri_energy(g, q, cfg_.quadrature);
        const double vc = (q[0].y + q[1].y + q[2].y) / 3.0;
        const double curv = te.dirichlet * 6.0 * g.area / (12.0 * vc * vc * vc * vc);
        double bw = 0.0;
        if (mu_ > 0.0) {
          const double jh = detail::hyperbolic_jacobian(g, q, te.jacobian);
          bw = mu_ * detail::barrier_area(g) / (jh * jh);
        }
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            const double kab =
                2.0 * te.weight * (g.grad[a][0] * g.grad[b][0] + g.grad[a][1] * g.grad[b][1]);
            const double kyy = kab + curv * (a == b ? 2.0 : 1.0);
            add_block(trip, t, tr[a], tr[b], kab, kyy, tangent);
          }
      }
    }
    Eigen::SparseMatrix<double> H(dofs_.size, dofs_.size);
    H.setFromTriplets(trip.begin(), trip.end());
    // Scale-aware regularization keeps the factorization definite.
    for (int i = 0; i < dofs_.size; ++i) H.coeffRef(i, i) *= 1.0 + 1e-10;
    return H;
  }

  // ----- main loop -----

  EnergyReport minimize() {
    EnergyReport rep;
    rep.mode = cfg_.barrier ? 'D' : 'W';
    if (cfg_.barrier && !(min_jacobian() > 0.0))
      throw Error(ErrorKind::BarrierInfeasible,
                  "mode D needs an orientation preserving start; min Jacobian " +
                      std::to_string(min_jacobian()));
    double phi = objective();
    if (phi == kInf) throw Error(ErrorKind::InvalidTarget, "starting map is not admissible");
    record(rep, phi);
    int stalls = 0;

    for (int it = 0;; ++it) {
      Eigen::SparseMatrix<double> H = preconditioner();
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
      Eigen::VectorXd g = gradient();
      Eigen::VectorXd p = -ldlt.solve(g);
      rep.stationarity = 0.5 * std::max(0.0, -g.dot(p));
      if (rep.stationarity <= cfg_.tol * std::abs(phi)) {
        rep.converged = true;
        break;
      }
      if (it >= cfg_.max_iterations) break;
      ++rep.iterations;
      const double before = phi;

      face_sweep(H);
      phi = objective();
      record(rep, phi);
      edge_sweep(H);
      phi = objective();
      record(rep, phi);

      // Global preconditioned step from the updated point.
      g = gradient();
      p = -ldlt.solve(g);
      if (!line_search_global(p, g, phi)) rep.line_search_failed = true;
      phi = objective();
      record(rep, phi);

      if (mu_ > 0.0) {
        mu_ = std::max(cfg_.barrier_floor, mu_ * cfg_.barrier_decay);
        phi = objective();
        record(rep, phi);
      }
      const double gain = before - phi;
      if (gain <= 1e-14 * std::abs(before)) {
        if (++stalls >= 3) {
          rep.converged = true;
          break;
        }
      } else {
        stalls = 0;
      }
      if (rep.line_search_failed && gain <= 0.0) break;
    }
    const EnergyReport e = energy(u_, geom_, cfg_.quadrature);
    rep.total = e.total;
    rep.per_face = e.per_face;
    rep.min_jacobian = min_jacobian();
    return rep;
  }

  /// Per-face objective values before and after the most recent face sweep.
  const std::vector<std::array<double, 2>>& face_sweep_log() const { return face_log_; }

  /// One sweep of Dirichlet replacement steps over all faces; faces are
  /// independent once the edge heights are frozen.
  void face_sweep(const Eigen::SparseMatrix<double>& H) {
    face_log_.assign(num_faces(), {0.0, 0.0});
    auto work = [&](int t) {
      const std::vector<int>& fd = dofs_.face_dofs[t];
      if (fd.empty()) {
        face_log_[t] = {face_objective(t), face_objective(t)};
        return;
      }
      face_log_[t][0] = face_objective(t);
      for (int step = 0; step < cfg_.face_steps; ++step) {
        Eigen::VectorXd x(fd.size());
        for (std::size_t i = 0; i < fd.size(); ++i) x[i] = get_dof(fd[i]);
        const auto ng = face_node_gradient(t);
        Eigen::VectorXd g(fd.size());
        for (std::size_t i = 0; i < fd.size(); ++i) {
          const auto [face, node, comp] = node_of_dof_[fd[i]];
          g[i] = ng[node][comp];
        }
        Eigen::SparseMatrix<double> Hf = restrict_to(H, fd);
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Hf);
        const Eigen::VectorXd p = -ldlt.solve(g);
        const double slope = g.dot(p);
        if (!(slope < 0.0)) break;
        double f0 = face_objective(t);
        double alpha = 1.0;
        bool ok = false;
        for (int b = 0; b < cfg_.max_backtracks; ++b, alpha *= cfg_.backtrack) {
          for (std::size_t i = 0; i < fd.size(); ++i) set_dof(fd[i], x[i] + alpha * p[i]);
          const double f1 = face_objective(t);
          if (f1 <= f0 + cfg_.armijo * alpha * slope) {
            ok = true;
            break;
          }
        }
        if (!ok) {
          for (std::size_t i = 0; i < fd.size(); ++i) set_dof(fd[i], x[i]);
          break;
        }
      }
      face_log_[t][1] = face_objective(t);
    };
    run_parallel(num_faces(), work);
  }

  /// One-dimensional Newton-Armijo steps on each free edge height.
  void edge_sweep(const Eigen::SparseMatrix<double>& H) {
    for (std::size_t k = 0; k < dofs_.edge.size(); ++k) {
      const int dof = dofs_.edge[k];
      if (dof < 0) continue;
      const double f0 = patch_objective(k);
      if (f0 == kInf) continue;
      double d = 0.0;
      for (const auto& [face, local] : u_.mesh->edge_nodes[k].members) {
        const auto ng = patch_node_gradient(face, local);
        const auto tan = u_.edge_tangent(face, local);
        d += ng[0] * tan[0] + ng[1] * tan[1];
      }
      const double hk = H.coeff(dof, dof);
      if (!(hk > 0.0) || d == 0.0) continue;
      const double x0 = u_.edge_logy[k];
      const double p = -d / hk;
      double alpha = 1.0;
      bool ok = false;
      for (int b = 0; b < cfg_.max_backtracks; ++b, alpha *= cfg_.backtrack) {
        set_edge(k, x0 + alpha * p);
        const double f1 = patch_objective(k);
        if (f1 <= f0 + cfg_.armijo * alpha * d * p) {
          ok = true;
          break;
        }
      }
      if (!ok) set_edge(k, x0);
    }
  }

  bool line_search_global(const Eigen::VectorXd& p, const Eigen::VectorXd& g, double phi0) {
    const double slope = g.dot(p);
    if (!(slope < 0.0)) return true;
    const Eigen::VectorXd x0 = u_.dofs(dofs_);
    double alpha = 1.0;
    for (int b = 0; b < cfg_.max_backtracks; ++b, alpha *= cfg_.backtrack) {
      u_.set_dofs(dofs_, x0 + alpha * p);
      const double f1 = objective();
      if (f1 <= phi0 + cfg_.armijo * alpha * slope) return true;
    }
    u_.set_dofs(dofs_, x0);
    return false;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  int num_faces() const { return static_cast<int>(u_.mesh->faces.size()); }

  void record(EnergyReport& rep, double phi) {
    rep.trace.push_back(phi);
    rep.energy_trace.push_back(total_energy());
    rep.jacobian_trace.push_back(min_jacobian());
  }

  void add_barrier_grad(const TriGeom& g, const std::array<UHPoint, 3>& q, const TriEnergy& te,
                        std::array<std::array<double, 2>, 3>& gr) const {
    const double vc = (q[0].y + q[1].y + q[2].y) / 3.0;
    const double yc2 = g.centroid_y * g.centroid_y;
    const double jh = te.jacobian * yc2 / (vc * vc);
    const double w = mu_ * detail::barrier_area(g) * (1.0 - 1.0 / jh);
    for (int i = 0; i < 3; ++i) {
      const double dJx = g.grad[i][0] * te.gf2[1] - g.grad[i][1] * te.gf2[0];
      const double dJy = te.gf1[0] * g.grad[i][1] - te.gf1[1] * g.grad[i][0];
      gr[i][0] += w * dJx * yc2 / (vc * vc);
      gr[i][1] += w * (dJy * yc2 / (vc * vc) - 2.0 * te.jacobian * yc2 / (vc * vc * vc) / 3.0);
    }
  }

  // Node -> dof incidence for the preconditioner.
  void add_block(std::vector<Eigen::Triplet<double>>& trip, int t, int a, int b, double kxx,
                 double kyy, const std::vector<std::array<double, 2>>& tangent) const {
    const auto cols = [&](int n, std::array<std::pair<int, std::array<double, 2>>, 2>& out) {
      const int nd = dofs_.node[t][n];
      if (nd >= 0) {
        out[0] = {nd, {1.0, 0.0}};
        out[1] = {nd + 1, {0.0, 1.0}};
        return 2;
      }
      const MeshNode& node = u_.mesh->faces[t].nodes[n];
      if (node.kind == NodeKind::Edge && dofs_.edge[node.edge_node] >= 0) {
        out[0] = {dofs_.edge[node.edge_node], tangent[n]};
        return 1;
      }
      return 0;
    };
    std::array<std::pair<int, std::array<double, 2>>, 2> ca{}, cb{};
    const int na = cols(a, ca), nb = cols(b, cb);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j) {
        const double v = ca[i].second[0] * kxx * cb[j].second[0] + ca[i].second[1] * kyy * cb[j].second[1];
        if (v != 0.0) trip.emplace_back(ca[i].first, cb[j].first, v);
      }
  }

  static Eigen::SparseMatrix<double> restrict_to(const Eigen::SparseMatrix<double>& H,
                                                 const std::vector<int>& idx) {
    std::vector<int> pos(H.rows(), -1);
    for (std::size_t i = 0; i < idx.size(); ++i) pos[idx[i]] = static_cast<int>(i);
    std::vector<Eigen::Triplet<double>> trip;
    for (int i : idx)
      for (Eigen::SparseMatrix<double>::InnerIterator it(H, i); it; ++it)
        if (pos[it.row()] >= 0) trip.emplace_back(pos[it.row()], pos[i], it.value());
    Eigen::SparseMatrix<double> R(static_cast<int>(idx.size()), static_cast<int>(idx.size()));
    R.setFromTriplets(trip.begin(), trip.end());
    return R;
  }

  void build_node_map() {
    node_of_dof_.assign(dofs_.size, {-1, -1, -1});
    for (std::size_t t = 0; t < dofs_.node.size(); ++t)
      for (std::size_t i = 0; i < dofs_.node[t].size(); ++i)
        if (dofs_.node[t][i] >= 0) {
          node_of_dof_[dofs_.node[t][i]] = {static_cast<int>(t), static_cast<int>(i), 0};
          node_of_dof_[dofs_.node[t][i] + 1] = {static_cast<int>(t), static_cast<int>(i), 1};
        }
  }

  // Triangles touching each edge-node class, per face.
  void build_edge_patches() {
    const ComplexMesh& m = *u_.mesh;
    std::vector<std::vector<std::vector<int>>> node_tris(m.faces.size());
    for (std::size_t t = 0; t < m.faces.size(); ++t) {
      node_tris[t].resize(m.faces[t].nodes.size());
      for (std::size_t k = 0; k < m.faces[t].triangles.size(); ++k)
        for (int v : m.faces[t].triangles[k]) node_tris[t][v].push_back(static_cast<int>(k));
    }
    patches_.resize(m.edge_nodes.size());
    node_patch_.resize(m.faces.size());
    for (std::size_t t = 0; t < m.faces.size(); ++t) node_patch_[t] = node_tris[t];
    for (std::size_t k = 0; k < m.edge_nodes.size(); ++k)
      for (const auto& [face, local] : m.edge_nodes[k].members)
        for (int tri : node_tris[face][local]) patches_[k].push_back({face, tri});
  }

  double patch_objective(std::size_t k) const {
    double s = 0.0;
    for (const auto& [t, tri] : patches_[k]) {
      const TriObjective o = tri_objective(t, tri);
      if (!o.feasible) return kInf;
      s += o.energy + mu_ * o.barrier;
    }
    return s;
  }

  std::array<double, 2> patch_node_gradient(int t, int local) const {
    std::array<double, 2> out{0.0, 0.0};
    const FaceMesh& f = u_.mesh->faces[t];
    for (int k : node_patch_[t][local]) {
      const Tri& tr = f.triangles[k];
      const std::array<UHPoint, 3> q{u_.image[t][tr[0]], u_.image[t][tr[1]], u_.image[t][tr[2]]};
      const TriGeom& g = geom_.tris[t][k];
      const TriEnergy te = tri_energy(g, q, cfg_.quadrature);
      auto gr = tri_energy_grad(g, q, te, cfg_.quadrature);
      if (mu_ > 0.0) add_barrier_grad(g, q, te, gr);
      for (int i = 0; i < 3; ++i)
        if (tr[i] == local) {
          out[0] += gr[i][0];
          out[1] += gr[i][1];
        }
    }
    return out;
  }

  double get_dof(int dof) const {
    const auto [t, n, c] = node_of_dof_[dof];
    return c == 0 ? u_.image[t][n].x : u_.image[t][n].y;
  }

  void set_dof(int dof, double v) {
    const auto [t, n, c] = node_of_dof_[dof];
    if (c == 0) u_.image[t][n].x = v;
    else u_.image[t][n].y = v;
  }

  void set_edge(std::size_t k, double logy) {
    u_.edge_logy[k] = logy;
    for (const auto& [face, local] : u_.mesh->edge_nodes[k].members)
      u_.image[face][local] = u_.edge_image(face, local, logy);
  }

  void run_parallel(int n, const std::function<void(int)>& fn) const {
    const int nt = std::max(1, std::min(cfg_.threads, n));
    if (nt == 1) {
      for (int i = 0; i < n; ++i) fn(i);
      return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < nt; ++w)
      pool.emplace_back([&, w] {
        for (int i = w; i < n; i += nt) fn(i);
      });
    for (auto& th : pool) th.join();
  }

  SimplicialMap& u_;
  SolverConfig cfg_;
  MeshGeometry geom_;
  DofMap dofs_;
  double mu_ = 0.0;
  std::vector<std::array<int, 3>> node_of_dof_;
  std::vector<std::vector<std::pair<int, int>>> patches_;
  std::vector<std::vector<std::vector<int>>> node_patch_;
  std::vector<std::array<double, 2>> face_log_;
};

inline EnergyReport minimize(SimplicialMap& u, const SolverConfig& cfg) {
  Solver s(u, cfg);
  return s.minimize();
}

/// Transfer a map to an exhausted mesh. Nodes present before keep their
/// images; the new band near each cusp gets the cusp rescaling, which is the
/// frozen data the old cut nodes already carry.
inline SimplicialMap carry_forward(const SimplicialMap& prev, std::shared_ptr<const ComplexMesh> next) {
  const ComplexMesh& m = *next;
  const ComplexMesh& old = *prev.mesh;
  SimplicialMap u = prev;
  u.mesh = next;
  u.edge_logy.resize(m.edge_nodes.size());
  for (std::size_t k = old.edge_nodes.size(); k < m.edge_nodes.size(); ++k) {
    const EdgeNodeClass& cls = m.edge_nodes[k];
    const auto d = edge_end_shifts(u, cls.edge);
    const double shift = cls.y < old.edge_range[cls.edge][0] ? d[0] : d[1];
    u.edge_logy[k] = std::log(cls.y) + shift;
  }
  for (std::size_t t = 0; t < m.faces.size(); ++t) {
    const FaceMesh& f = m.faces[t];
    u.image[t].resize(f.nodes.size());
    for (std::size_t i = old.faces[t].nodes.size(); i < f.nodes.size(); ++i) {
      const MeshNode& n = f.nodes[i];
      if (n.kind == NodeKind::Edge) {
        const int k = n.edge_node;
        const bool same = u.edge_logy[k] == std::log(m.edge_nodes[k].y) &&
                          u.tau_edges[m.edge_nodes[k].edge].scales ==
                              m.edge_models[m.edge_nodes[k].edge].scales;
        u.image[t][i] = same ? n.p : u.edge_image(static_cast<int>(t), static_cast<int>(i), u.edge_logy[k]);
        continue;
      }
      int corner = n.corner;
      if (n.kind != NodeKind::Cut)
        for (int c = 0; c < 3; ++c)
          if (n.regions & (1u << c)) {
            corner = c;
            break;
          }
      u.image[t][i] = corner < 0 ? n.p : cusp_rescaled(u, static_cast<int>(t), corner, n.p);
    }
  }
  return u;
}

struct StageResult {
  double y_cut = 0.0;
  int nodes = 0;
  EnergyReport report;
  // Max hyperbolic distance between this stage's and the previous stage's
  // images of the stage-1 nodes; zero for the first stage.
  double displacement = 0.0;
};

struct ExhaustionResult {
  std::vector<StageResult> stages;
  SimplicialMap map;
};

/// Solve on the cut level schedule, carrying each solution to the next,
/// larger truncation.
inline ExhaustionResult solve_with_exhaustion(const Complex& c, const IdealMetric& sigma,
                                              const IdealMetric& tau, const SolverConfig& cfg,
                                              MeshConfig mcfg) {
  if (cfg.schedule.empty()) throw Error(ErrorKind::InvalidSpec, "empty exhaustion schedule");
  for (std::size_t i = 1; i < cfg.schedule.size(); ++i)
    if (!(cfg.schedule[i] > cfg.schedule[i - 1]))
      throw Error(ErrorKind::InvalidSpec, "exhaustion schedule must increase");
  mcfg.y_cut = cfg.schedule.front();
  auto mesh = std::make_shared<const ComplexMesh>(build_mesh(c, sigma, mcfg));
  ExhaustionResult out;
  out.map = initial_map(mesh, tau);
  std::vector<std::size_t> first_count;
  for (const FaceMesh& f : mesh->faces) first_count.push_back(f.nodes.size());
  std::vector<std::vector<UHPoint>> last;
  for (std::size_t k = 0; k < cfg.schedule.size(); ++k) {
    if (k > 0) {
      mesh = std::make_shared<const ComplexMesh>(exhaust(*out.map.mesh, cfg.schedule[k]));
      out.map = carry_forward(out.map, mesh);
    }
    StageResult st;
    st.y_cut = cfg.schedule[k];
    st.nodes = mesh->num_nodes();
    st.report = minimize(out.map, cfg);
    if (k > 0)
      for (std::size_t t = 0; t < first_count.size(); ++t)
        for (std::size_t i = 0; i < first_count[t]; ++i)
          st.displacement = std::max(st.displacement, hyp_distance(out.map.image[t][i], last[t][i]));
    last.assign(first_count.size(), {});
    for (std::size_t t = 0; t < first_count.size(); ++t)
      last[t].assign(out.map.image[t].begin(), out.map.image[t].begin() + first_count[t]);
    out.stages.push_back(std::move(st));
  }
  return out;
}

}  // namespace ihm
