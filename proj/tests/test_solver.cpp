#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "fixtures.hpp"
#include "ihm/solver.hpp"

using namespace ihm;
using namespace ihm::testing;

namespace {

using MeshPtr = std::shared_ptr<const ComplexMesh>;

MeshPtr make_mesh(const ComplexSpec& spec, double h) {
  const Complex c = build_complex(spec);
  MeshConfig cfg;
  cfg.h = h;
  return std::make_shared<const ComplexMesh>(build_mesh(c, IdealMetric::zero(c), cfg));
}

IdealMetric generic_metric(const Complex& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_metric(c, rng, true);
}

// Moves free interior nodes by up to amp * h * y; edge heights untouched.
void perturb_interior(SimplicialMap& u, double amp, std::uint64_t seed) {
  const DofMap d = DofMap::build(*u.mesh);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amp, amp);
  for (std::size_t t = 0; t < u.image.size(); ++t)
    for (std::size_t i = 0; i < u.image[t].size(); ++i)
      if (d.node[t][i] >= 0) {
        UHPoint& p = u.image[t][i];
        const double s = u.mesh->cfg.h * p.y;
        p.x += U(rng) * s;
        p.y += U(rng) * s;
      }
}

double max_displacement(const SimplicialMap& a, const SimplicialMap& b) {
  double m = 0.0;
  for (std::size_t t = 0; t < a.image.size(); ++t)
    for (std::size_t i = 0; i < a.image[t].size(); ++i)
      m = std::max(m, hyp_distance(a.image[t][i], b.image[t][i]));
  return m;
}

void expect_non_increasing(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1]) << "entry " << i;
}

void expect_simplicial(const SimplicialMap& u) {
  const DofMap d = DofMap::build(*u.mesh);
  for (std::size_t t = 0; t < u.image.size(); ++t)
    for (std::size_t i = 0; i < u.image[t].size(); ++i)
      if (d.node[t][i] >= 0) EXPECT_TRUE(in_closed_face(u.image[t][i]));
  for (std::size_t k = 0; k < u.edge_logy.size(); ++k) {
    EXPECT_TRUE(std::isfinite(u.edge_logy[k]));
    for (const auto& [face, local] : u.mesh->edge_nodes[k].members) {
      const UHPoint expect = u.edge_image(face, local, u.edge_logy[k]);
      EXPECT_EQ(u.image[face][local].x, expect.x);
      EXPECT_EQ(u.image[face][local].y, expect.y);
    }
  }
}

}  // namespace

TEST(Solver, IdentityTerminatesImmediately) {
  for (const auto& spec : {double_triangle_spec(), book_spec(), punctured_torus_spec()}) {
    const MeshPtr m = make_mesh(spec, 0.05);
    SimplicialMap u = initial_map(m, m->sigma);
    const SimplicialMap id = u;
    const EnergyReport r = minimize(u, SolverConfig{});
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations, 1);
    EXPECT_LE(max_displacement(u, id), 1e-3);
    EXPECT_EQ(r.mode, 'W');
  }
}

TEST(Solver, PerturbedIdentityConvergesBack) {
  const MeshPtr m = make_mesh(book_spec(), 0.1);
  // discrete minimizer, reached from the identity at a tight tolerance
  SimplicialMap star = initial_map(m, m->sigma);
  const double E_id = energy(star, MeshGeometry::build(*m)).total;
  SolverConfig tight;
  tight.tol = 1e-14;
  const EnergyReport rs = minimize(star, tight);
  EXPECT_LE(rs.total, E_id);
  EXPECT_GE(rs.total, E_id * (1.0 - 1e-7));

  double prev_disp = INFINITY;
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    SimplicialMap u = initial_map(m, m->sigma);
    perturb_interior(u, 0.3, 77);
    const double start = max_displacement(u, star);
    SolverConfig cfg;
    cfg.tol = tol;
    const EnergyReport r = minimize(u, cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.stationarity, tol * r.trace.back());
    // E - E* is at most a small multiple of the predicted decrease
    EXPECT_LE(r.total - rs.total, 10.0 * tol * rs.total + 1e-12 * rs.total) << "tol " << tol;
    const double disp = max_displacement(u, star);
    EXPECT_LT(disp, start);
    EXPECT_LE(disp, prev_disp * 1.0001) << "tol " << tol;
    prev_disp = disp;
  }
  EXPECT_LT(prev_disp, 1e-4);
}

TEST(Solver, DoubleTriangleRigidTarget) {
  // The only complete metric on the double triangle is the zero one, so the
  // perturbed problem must relax to the identity energy.
  const MeshPtr m = make_mesh(double_triangle_spec(), 0.05);
  EXPECT_EQ(dims(m->complex).teich_dim, 0);
  SimplicialMap u = initial_map(m, m->sigma);
  perturb_interior(u, 0.3, 5);
  const EnergyReport r = minimize(u, SolverConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(std::abs(r.total / (2.0 * m->truncated_area()) - 1.0), 0.02);
}

TEST(Solver, TraceNonIncreasingAndSimplicial) {
  for (const auto& spec : {book_spec(), punctured_torus_spec()}) {
    const MeshPtr m = make_mesh(spec, 0.1);
    SimplicialMap u = initial_map(m, generic_metric(m->complex, 7));
    const EnergyReport r = minimize(u, SolverConfig{});
    EXPECT_TRUE(r.converged);
    EXPECT_FALSE(r.line_search_failed);
    ASSERT_GE(r.trace.size(), 2u);
    expect_non_increasing(r.trace);
    ASSERT_EQ(r.trace.size(), r.energy_trace.size());
    for (std::size_t i = 0; i < r.trace.size(); ++i)
      EXPECT_NEAR(r.trace[i], r.energy_trace[i], 1e-13 * r.trace[i]);
    EXPECT_NEAR(r.total, r.trace.back(), 1e-12 * r.total);
    double sum = 0.0;
    for (double e : r.per_face) sum += e;
    EXPECT_NEAR(sum, r.total, 1e-12 * r.total);
    expect_simplicial(u);
  }
}

TEST(Solver, FaceSweepDominance) {
  const MeshPtr m = make_mesh(book_spec(), 0.1);
  SimplicialMap u = initial_map(m, generic_metric(m->complex, 3));
  perturb_interior(u, 0.2, 4);
  Solver s(u, SolverConfig{});
  for (int it = 0; it < 5; ++it) {
    const auto H = s.preconditioner();
    s.face_sweep(H);
    const auto& log = s.face_sweep_log();
    ASSERT_EQ(log.size(), m->faces.size());
    for (const auto& [before, after] : log) EXPECT_LE(after, before);
    s.edge_sweep(H);
  }
}

TEST(Solver, ModeDKeepsOrientation) {
  for (const auto& spec : {book_spec(), punctured_torus_spec()}) {
    const MeshPtr m = make_mesh(spec, 0.1);
    SimplicialMap u = initial_map(m, generic_metric(m->complex, 11));
    SolverConfig cfg;
    cfg.barrier = true;
    const EnergyReport r = minimize(u, cfg);
    EXPECT_EQ(r.mode, 'D');
    EXPECT_TRUE(r.converged);
    expect_non_increasing(r.trace);
    ASSERT_EQ(r.jacobian_trace.size(), r.trace.size());
    for (double j : r.jacobian_trace) EXPECT_GT(j, 0.0);
    EXPECT_GT(r.min_jacobian, 0.0);
    expect_simplicial(u);

    // the W minimizer from the same start has energy no larger
    SimplicialMap w = initial_map(m, u.tau);
    const EnergyReport rw = minimize(w, SolverConfig{});
    EXPECT_LE(rw.total, r.total * (1.0 + 1e-8));
  }
}

TEST(Solver, ModeDRejectsFoldedStart) {
  const MeshPtr m = make_mesh(book_spec(), 0.1);
  SimplicialMap u = initial_map(m, m->sigma);
  // reflect one interior node through the opposite side of a triangle
  const FaceMesh& f = m->faces[0];
  const DofMap d = DofMap::build(*m);
  for (const Tri& t : f.triangles)
    if (d.node[0][t[0]] >= 0) {
      const UHPoint a = u.image[0][t[0]], b = u.image[0][t[1]], c = u.image[0][t[2]];
      const UHPoint mid{0.5 * (b.x + c.x), 0.5 * (b.y + c.y)};
      u.image[0][t[0]] = {2.0 * mid.x - a.x, 2.0 * mid.y - a.y};
      break;
    }
  SolverConfig cfg;
  cfg.barrier = true;
  try {
    minimize(u, cfg);
    FAIL() << "expected BarrierInfeasible";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BarrierInfeasible);
  }
  // mode W accepts the same start
  EXPECT_NO_THROW(minimize(u, SolverConfig{}));
}

TEST(Solver, ThreadedScheduleNonIncreasing) {
  const MeshPtr m = make_mesh(book_spec(), 0.1);
  const IdealMetric tau = generic_metric(m->complex, 7);
  SimplicialMap a = initial_map(m, tau), b = a;
  SolverConfig cfg;
  const EnergyReport ra = minimize(a, cfg);
  cfg.threads = 4;
  const EnergyReport rb = minimize(b, cfg);
  expect_non_increasing(rb.trace);
  EXPECT_TRUE(rb.converged);
  EXPECT_NEAR(rb.total, ra.total, 1e-6 * ra.total);
}

TEST(Solver, IterationCapStopsEarly) {
  const MeshPtr m = make_mesh(book_spec(), 0.1);
  SimplicialMap u = initial_map(m, generic_metric(m->complex, 7));
  SolverConfig cfg;
  cfg.max_iterations = 1;
  const EnergyReport r = minimize(u, cfg);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_FALSE(r.converged);
  expect_non_increasing(r.trace);
}

TEST(Exhaustion, EqualMetricsZeroDisplacement) {
  // At h = 0.05 the identity meets the stationarity test, so no stage moves.
  const Complex c = build_complex(double_triangle_spec());
  SolverConfig cfg;
  cfg.schedule = {2.0, 4.0, 8.0};
  MeshConfig mc;
  mc.h = 0.05;
  const ExhaustionResult r = solve_with_exhaustion(c, IdealMetric::zero(c), IdealMetric::zero(c), cfg, mc);
  ASSERT_EQ(r.stages.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(r.stages[k].displacement, 0.0);
    EXPECT_EQ(r.stages[k].report.iterations, 0);
    EXPECT_EQ(r.stages[k].y_cut, cfg.schedule[k]);
    if (k) EXPECT_GT(r.stages[k].nodes, r.stages[k - 1].nodes);
  }
}

TEST(Exhaustion, SingleStageMatchesMinimize) {
  const Complex c = build_complex(book_spec());
  const IdealMetric tau = generic_metric(c, 7);
  MeshConfig mc;
  mc.h = 0.1;
  SolverConfig cfg;
  const ExhaustionResult r = solve_with_exhaustion(c, IdealMetric::zero(c), tau, cfg, mc);
  ASSERT_EQ(r.stages.size(), 1u);
  auto m = std::make_shared<const ComplexMesh>(build_mesh(c, IdealMetric::zero(c), mc));
  SimplicialMap u = initial_map(m, tau);
  const EnergyReport direct = minimize(u, cfg);
  EXPECT_EQ(r.stages[0].report.trace, direct.trace);
  EXPECT_EQ(r.stages[0].report.total, direct.total);
  EXPECT_EQ(r.stages[0].displacement, 0.0);
}

TEST(Exhaustion, GenericStagesRecorded) {
  const Complex c = build_complex(book_spec());
  SolverConfig cfg;
  cfg.schedule = {2.0, 4.0, 8.0};
  MeshConfig mc;
  mc.h = 0.1;
  const ExhaustionResult r = solve_with_exhaustion(c, IdealMetric::zero(c), generic_metric(c, 7), cfg, mc);
  ASSERT_EQ(r.stages.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_TRUE(r.stages[k].report.converged);
    expect_non_increasing(r.stages[k].report.trace);
  }
  // displacement is recorded, not bounded; it must be finite and positive
  EXPECT_GT(r.stages[1].displacement, 0.0);
  EXPECT_TRUE(std::isfinite(r.stages[2].displacement));
  // truncated energy grows with the region
  EXPECT_GT(r.stages[2].report.total, r.stages[0].report.total);
}

TEST(Exhaustion, RejectsBadSchedule) {
  const Complex c = build_complex(double_triangle_spec());
  MeshConfig mc;
  mc.h = 0.1;
  SolverConfig cfg;
  cfg.schedule = {};
  EXPECT_THROW(solve_with_exhaustion(c, IdealMetric::zero(c), IdealMetric::zero(c), cfg, mc), Error);
  cfg.schedule = {4.0, 2.0};
  EXPECT_THROW(solve_with_exhaustion(c, IdealMetric::zero(c), IdealMetric::zero(c), cfg, mc), Error);
}
