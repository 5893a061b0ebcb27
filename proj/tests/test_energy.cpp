#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "ihm/solver.hpp"

using namespace ihm;
using namespace ihm::testing;

namespace {

using MeshPtr = std::shared_ptr<const ComplexMesh>;

MeshPtr make_mesh(const ComplexSpec& spec, double h, const IdealMetric* sigma = nullptr) {
  const Complex c = build_complex(spec);
  MeshConfig cfg;
  cfg.h = h;
  return std::make_shared<const ComplexMesh>(build_mesh(c, sigma ? *sigma : IdealMetric::zero(c), cfg));
}

IdealMetric generic_metric(const Complex& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_metric(c, rng, true);
}

// Random displacement of every free node by up to `amp` times h y, and of
// every free edge height by up to `amp` times h in log y.
void perturb(SimplicialMap& u, double amp, std::uint64_t seed) {
  const DofMap d = DofMap::build(*u.mesh);
  const double h = u.mesh->cfg.h;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amp, amp);
  for (std::size_t t = 0; t < u.image.size(); ++t)
    for (std::size_t i = 0; i < u.image[t].size(); ++i)
      if (d.node[t][i] >= 0) {
        UHPoint& p = u.image[t][i];
        const double s = h * p.y;
        p.x += U(rng) * s;
        p.y += U(rng) * s;
      }
  for (std::size_t k = 0; k < d.edge.size(); ++k)
    if (d.edge[k] >= 0) u.edge_logy[k] += U(rng) * h;
  u.sync_edges();
}

// Gauss-Legendre rule on [0, 1] by Newton iteration on P_n.
std::vector<std::pair<double, double>> gauss_legendre(int n) {
  std::vector<std::pair<double, double>> out;
  for (int i = 1; i <= n; ++i) {
    double x = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    out.push_back({0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp)});
  }
  return out;
}

// Dense-quadrature value of sum_T |D f|^2 * int_T f2^-2 dA, with D f computed
// from the node coordinates by a direct 2x2 solve.
double energy_oracle(const SimplicialMap& u) {
  static const auto gl = gauss_legendre(24);
  double total = 0.0;
  for (std::size_t t = 0; t < u.image.size(); ++t) {
    const FaceMesh& f = u.mesh->faces[t];
    for (const Tri& tr : f.triangles) {
      const UHPoint &a = f.nodes[tr[0]].p, &b = f.nodes[tr[1]].p, &c = f.nodes[tr[2]].p;
      const UHPoint &A = u.image[t][tr[0]], &B = u.image[t][tr[1]], &C = u.image[t][tr[2]];
      Eigen::Matrix2d P, Q;
      P << b.x - a.x, c.x - a.x, b.y - a.y, c.y - a.y;
      Q << B.x - A.x, C.x - A.x, B.y - A.y, C.y - A.y;
      const Eigen::Matrix2d Df = Q * P.inverse();
      const double area = 0.5 * std::abs(P.determinant());
      double w = 0.0;
      for (const auto& [xi, wx] : gl)
        for (const auto& [eta, wy] : gl) {
          const double s = xi, r = (1.0 - xi) * eta;
          const double v = A.y + s * (B.y - A.y) + r * (C.y - A.y);
          w += wx * wy * (1.0 - xi) / (v * v);
        }
      total += Df.squaredNorm() * 2.0 * area * w;
    }
  }
  return total;
}

struct Patch {
  std::vector<std::pair<int, int>> tris;  // (face, triangle)
};

// Triangles touching the nodes moved by one DOF.
Patch patch_of(const SimplicialMap& u, const DofMap& d, int dof) {
  std::set<std::pair<int, int>> nodes;
  for (std::size_t t = 0; t < d.node.size(); ++t)
    for (std::size_t i = 0; i < d.node[t].size(); ++i)
      if (d.node[t][i] >= 0 && (d.node[t][i] == dof || d.node[t][i] + 1 == dof))
        nodes.insert({static_cast<int>(t), static_cast<int>(i)});
  for (std::size_t k = 0; k < d.edge.size(); ++k)
    if (d.edge[k] == dof)
      for (const auto& m : u.mesh->edge_nodes[k].members) nodes.insert(m);
  Patch p;
  for (const auto& [t, i] : nodes) {
    const auto& tris = u.mesh->faces[t].triangles;
    for (std::size_t k = 0; k < tris.size(); ++k)
      if (std::find(tris[k].begin(), tris[k].end(), i) != tris[k].end())
        p.tris.push_back({t, static_cast<int>(k)});
  }
  std::sort(p.tris.begin(), p.tris.end());
  p.tris.erase(std::unique(p.tris.begin(), p.tris.end()), p.tris.end());
  return p;
}

double patch_objective(const Solver& s, const Patch& p) {
  double v = 0.0;
  for (const auto& [t, k] : p.tris) {
    const TriObjective o = s.tri_objective(t, k);
    v += o.energy + s.mu() * o.barrier;
  }
  return v;
}

struct FdStats {
  int checked = 0;
  double worst = 0.0;
};

// Central differences of the patch objective against the solver gradient.
FdStats fd_check(SimplicialMap& u, const Solver& s, int samples, std::uint64_t seed) {
  const DofMap& d = s.dofs();
  const Eigen::VectorXd g = s.gradient();
  const Eigen::VectorXd x0 = u.dofs(d);
  const double h = u.mesh->cfg.h;

  std::vector<int> pick;
  for (std::size_t k = 0; k < d.edge.size(); ++k)
    if (d.edge[k] >= 0) pick.push_back(d.edge[k]);
  std::mt19937_64 rng(seed);
  std::shuffle(pick.begin(), pick.end(), rng);
  pick.resize(std::min<std::size_t>(pick.size(), samples / 3));
  std::uniform_int_distribution<int> any(0, d.size - 1);
  while (static_cast<int>(pick.size()) < samples) pick.push_back(any(rng));

  FdStats st;
  for (int dof : pick) {
    const Patch p = patch_of(u, d, dof);
    bool is_edge = std::find(d.edge.begin(), d.edge.end(), dof) != d.edge.end();
    // node coordinates scale like h y in the chart; edge DOFs are log heights
    const double scale = is_edge ? h : h * x0[dof % 2 == 0 ? dof + 1 : dof];
    const double eps = 1e-5 * scale;
    auto at = [&](double delta) {
      Eigen::VectorXd x = x0;
      x[dof] += delta;
      u.set_dofs(d, x);
      return patch_objective(s, p);
    };
    const double base = at(0.0);
    const double fd = (at(eps) - at(-eps)) / (2.0 * eps);
    u.set_dofs(d, x0);
    // Relative error, with a floor of 1e-3 of the patch gradient scale so a
    // gradient that happens to vanish is not divided by roundoff.
    const double floor = 1e-3 * base / scale;
    const double err = std::abs(fd - g[dof]) / std::max(std::abs(g[dof]), floor);
    st.worst = std::max(st.worst, err);
    ++st.checked;
    EXPECT_LE(err, 1e-6) << "dof " << dof << (is_edge ? " (edge)" : "") << " fd " << fd
                         << " analytic " << g[dof];
  }
  return st;
}

}  // namespace

TEST(TriEnergy, ExactWeightMatchesQuadrature) {
  const TriGeom g = tri_geom({0.1, 1.0}, {0.3, 1.1}, {0.15, 1.4});
  const std::array<UHPoint, 3> q{UHPoint{0.2, 0.9}, UHPoint{0.5, 1.3}, UHPoint{0.1, 2.0}};
  const TriEnergy te = tri_energy(g, q);
  static const auto gl = gauss_legendre(30);
  double w = 0.0;
  for (const auto& [xi, wx] : gl)
    for (const auto& [eta, wy] : gl) {
      const double v = q[0].y + xi * (q[1].y - q[0].y) + (1.0 - xi) * eta * (q[2].y - q[0].y);
      w += wx * wy * (1.0 - xi) / (v * v);
    }
  w *= 2.0 * g.area;
  EXPECT_NEAR(te.weight, w, 1e-13 * w);
  const TriEnergy one = tri_energy(g, q, Quadrature::OnePoint);
  const double vc = (q[0].y + q[1].y + q[2].y) / 3.0;
  EXPECT_DOUBLE_EQ(one.weight, g.area / (vc * vc));
}

TEST(TriEnergy, GradientMatchesDifferences) {
  const TriGeom g = tri_geom({0.1, 1.0}, {0.3, 1.1}, {0.15, 1.4});
  std::array<UHPoint, 3> q{UHPoint{0.2, 0.9}, UHPoint{0.5, 1.3}, UHPoint{0.1, 2.0}};
  for (Quadrature quad : {Quadrature::Exact, Quadrature::OnePoint}) {
    const auto gr = tri_energy_grad(g, q, tri_energy(g, q, quad), quad);
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < 2; ++c) {
        const double eps = 1e-5;
        auto f = [&](double d) {
          auto r = q;
          (c == 0 ? r[i].x : r[i].y) += d;
          return tri_energy(g, r, quad).energy;
        };
        const double fd = (f(eps) - f(-eps)) / (2 * eps);
        EXPECT_NEAR(gr[i][c], fd, 1e-7 * std::abs(fd) + 1e-12);
      }
  }
}

TEST(Energy, IdentityIsTwiceTruncatedArea) {
  for (const auto& spec : {double_triangle_spec(), book_spec(), punctured_torus_spec()}) {
    double prev = 1.0;
    for (double h : {0.1, 0.05, 0.025}) {
      const MeshPtr m = make_mesh(spec, h);
      const SimplicialMap u = initial_map(m, m->sigma);
      const double E = energy(u, MeshGeometry::build(*m)).total;
      const double rel = std::abs(E / (2.0 * m->truncated_area()) - 1.0);
      if (h == 0.05) EXPECT_LE(rel, 0.01);
      EXPECT_LT(rel, prev) << "h " << h;
      prev = rel;
    }
  }
}

TEST(Energy, DensitySwapInvariant) {
  for (const auto& spec : {book_spec(), punctured_torus_spec()}) {
    const MeshPtr m = make_mesh(spec, 0.05);
    SimplicialMap u = initial_map(m, generic_metric(m->complex, 4));
    perturb(u, 0.2, 9);
    const MeshGeometry g = MeshGeometry::build(*m);
    for (Quadrature q : {Quadrature::Exact, Quadrature::OnePoint}) {
      const double a = energy(u, g, q, DomainDensity::Euclidean).total;
      const double b = energy(u, g, q, DomainDensity::Hyperbolic).total;
      EXPECT_LE(std::abs(a - b), 1e-12 * a);
    }
  }
}

TEST(Energy, NonnegativeAndFiniteUnderCollapse) {
  const MeshPtr m = make_mesh(book_spec(), 0.1);
  SimplicialMap u = initial_map(m, m->sigma);
  const FaceMesh& f = m->faces[0];
  // collapse an interior node onto a neighbour
  for (const Tri& t : f.triangles)
    if (f.nodes[t[0]].kind == NodeKind::Interior) {
      u.image[0][t[0]] = u.image[0][t[1]];
      break;
    }
  const EnergyReport r = energy(u, MeshGeometry::build(*m));
  EXPECT_TRUE(std::isfinite(r.total));
  EXPECT_GE(r.total, 0.0);
  for (double e : r.per_face) EXPECT_GE(e, 0.0);
}

TEST(Energy, InvalidTargetRejected) {
  const MeshPtr m = make_mesh(double_triangle_spec(), 0.1);
  SimplicialMap u = initial_map(m, m->sigma);
  const DofMap d = DofMap::build(*m);
  for (std::size_t i = 0; i < u.image[1].size(); ++i)
    if (d.node[1][i] >= 0) {
      u.image[1][i].y = -0.1;
      break;
    }
  try {
    energy(u, MeshGeometry::build(*m));
    FAIL() << "expected InvalidTarget";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidTarget);
  }
  EXPECT_THROW(energy_gradient(u, d, MeshGeometry::build(*m)), Error);
}

TEST(Energy, PerturbedSingleTriangleAboveIdentityAndMatchesOracle) {
  const MeshPtr m = make_mesh(single_triangle_spec(), 0.1);
  const SimplicialMap id = initial_map(m, m->sigma);
  const MeshGeometry g = MeshGeometry::build(*m);
  const double E0 = energy(id, g).total;
  EXPECT_NEAR(energy_oracle(id), E0, 1e-8 * E0);
  for (std::uint64_t seed : {1, 2, 3}) {
    SimplicialMap u = id;
    // interior nodes only; edge heights stay put
    const DofMap d = DofMap::build(*m);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-0.3, 0.3);
    for (std::size_t i = 0; i < u.image[0].size(); ++i)
      if (d.node[0][i] >= 0) {
        u.image[0][i].x += U(rng) * m->cfg.h * u.image[0][i].y;
        u.image[0][i].y += U(rng) * m->cfg.h * u.image[0][i].y;
      }
    const double E = energy(u, g).total;
    EXPECT_GT(E, E0);
    EXPECT_NEAR(energy_oracle(u), E, 1e-8 * E);
  }
}

TEST(Gradient, FiniteDifferencesModeW) {
  for (const auto& spec : {double_triangle_spec(), book_spec(), punctured_torus_spec()}) {
    const MeshPtr m = make_mesh(spec, 0.1);
    SimplicialMap u = initial_map(m, generic_metric(m->complex, 21));
    perturb(u, 0.25, 5);
    SolverConfig cfg;
    Solver s(u, cfg);
    const FdStats st = fd_check(u, s, 150, 17);
    EXPECT_GE(st.checked, 100);
    // the library gradient agrees with the solver gradient in mode W
    const Eigen::VectorXd a = energy_gradient(u, s.dofs(), s.geometry());
    EXPECT_LE((a - s.gradient()).norm(), 1e-14 * a.norm());
  }
}

TEST(Gradient, FiniteDifferencesModeD) {
  for (const auto& spec : {book_spec(), punctured_torus_spec()}) {
    const MeshPtr m = make_mesh(spec, 0.1);
    SimplicialMap u = initial_map(m, generic_metric(m->complex, 22));
    perturb(u, 0.05, 6);
    SolverConfig cfg;
    cfg.barrier = true;
    cfg.barrier_weight = 0.1;
    Solver s(u, cfg);
    ASSERT_GT(s.min_jacobian(), 0.0);
    const FdStats st = fd_check(u, s, 150, 18);
    EXPECT_GE(st.checked, 100);
  }
}

TEST(Gradient, EdgeDofIsSumOfFaceContributions) {
  const MeshPtr m = make_mesh(book_spec(), 0.1);
  SimplicialMap u = initial_map(m, generic_metric(m->complex, 3));
  perturb(u, 0.2, 1);
  const DofMap d = DofMap::build(*m);
  const MeshGeometry g = MeshGeometry::build(*m);
  const Eigen::VectorXd grad = energy_gradient(u, d, g);
  int checked = 0;
  for (std::size_t k = 0; k < d.edge.size(); ++k) {
    if (d.edge[k] < 0) continue;
    const auto parts = edge_dof_face_contributions(u, g, static_cast<int>(k));
    EXPECT_EQ(parts.size(), m->edge_nodes[k].members.size());
    double s = 0.0;
    for (double p : parts) s += p;
    EXPECT_EQ(grad[d.edge[k]], s);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(InitialMap, EqualMetricsGiveIdentity) {
  for (const auto& spec : {double_triangle_spec(), book_spec(), punctured_torus_spec()})
    for (std::uint64_t seed : {0, 12}) {
      const Complex c = build_complex(spec);
      const IdealMetric sigma = seed ? generic_metric(c, seed) : IdealMetric::zero(c);
      const MeshPtr m = make_mesh(spec, 0.05, &sigma);
      const SimplicialMap u = initial_map(m, sigma);
      for (std::size_t t = 0; t < m->faces.size(); ++t)
        for (std::size_t i = 0; i < m->faces[t].nodes.size(); ++i) {
          EXPECT_EQ(u.image[t][i].x, m->faces[t].nodes[i].p.x);
          EXPECT_EQ(u.image[t][i].y, m->faces[t].nodes[i].p.y);
        }
      for (std::size_t k = 0; k < m->edge_nodes.size(); ++k)
        EXPECT_EQ(u.edge_logy[k], std::log(m->edge_nodes[k].y));
      const double E = energy(u, MeshGeometry::build(*m)).total;
      EXPECT_LE(std::abs(E / (2.0 * m->truncated_area()) - 1.0), 0.01);
    }
}

TEST(InitialMap, GenericTargetIsSimplicialAndUnfolded) {
  for (const auto& spec : {double_triangle_spec(), book_spec(), punctured_torus_spec()})
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
      const Complex c = build_complex(spec);
      const MeshPtr m = make_mesh(spec, 0.1);
      const IdealMetric tau = generic_metric(c, seed);
      const SimplicialMap u = initial_map(m, tau);
      const DofMap d = DofMap::build(*m);
      for (std::size_t t = 0; t < m->faces.size(); ++t)
        for (std::size_t i = 0; i < u.image[t].size(); ++i) {
          EXPECT_TRUE(in_closed_face(u.image[t][i]));
          const MeshNode& n = m->faces[t].nodes[i];
          if (n.kind == NodeKind::Edge) {
            // stays on its side of the target face
            const UHPoint q = slot_chart(c.slot(static_cast<int>(t), n.side))(u.image[t][i]);
            EXPECT_NEAR(q.x, 0.0, 1e-12 * q.y);
          }
        }
      const EnergyReport r = energy(u, MeshGeometry::build(*m));
      EXPECT_GT(r.min_jacobian, 0.0);
      EXPECT_TRUE(std::isfinite(r.total));
      EXPECT_NEAR(energy_oracle(u), r.total, 1e-8 * r.total);
    }
}

TEST(InitialMap, EdgeHeightsInterpolateCuspRescalings) {
  const Complex c = build_complex(book_spec());
  const MeshPtr m = make_mesh(book_spec(), 0.1);
  const SimplicialMap u = initial_map(m, generic_metric(c, 8));
  for (std::size_t k = 0; k < m->edge_nodes.size(); ++k) {
    const EdgeNodeClass& cls = m->edge_nodes[k];
    const auto [dt, dh] = edge_end_shifts(u, cls.edge);
    const auto range = m->edge_range[cls.edge];
    const double w = std::log(cls.y / range[0]) / std::log(range[1] / range[0]);
    EXPECT_NEAR(u.edge_logy[k] - std::log(cls.y), (1.0 - w) * dt + w * dh, 1e-12);
    if (cls.y == range[0]) EXPECT_NEAR(u.edge_logy[k] - std::log(cls.y), dt, 1e-14);
    if (cls.y == range[1]) EXPECT_NEAR(u.edge_logy[k] - std::log(cls.y), dh, 1e-14);
  }
  // cut endpoints agree with the cut nodes' rescaling: the image of each cut
  // endpoint sits at the rescaled cut level of its corner
  for (std::size_t t = 0; t < m->faces.size(); ++t)
    for (std::size_t i = 0; i < m->faces[t].nodes.size(); ++i) {
      const MeshNode& n = m->faces[t].nodes[i];
      if (n.kind != NodeKind::Edge || !m->edge_nodes[n.edge_node].fixed) continue;
      for (int corner = 0; corner < 3; ++corner) {
        const double L = m->faces[t].levels[corner];
        if (std::abs(corner_level(corner, n.p) / L - 1.0) > 1e-9) continue;
        const double want = L * m->corner_scales[t][corner] / u.tau_corner_scales[t][corner];
        EXPECT_NEAR(corner_level(corner, u.image[t][i]), want, 1e-10 * want);
      }
    }
}
