#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "ihm/hyperbolic.hpp"

using namespace ihm;

namespace {

// Length of the geodesic arc through p and q, integrated along its circle.
double geodesic_length_quadrature(UHPoint p, UHPoint q) {
  const double c = ((q.x * q.x + q.y * q.y) - (p.x * p.x + p.y * p.y)) / (2.0 * (q.x - p.x));
  const double R = std::hypot(p.x - c, p.y);
  double a0 = std::atan2(p.y, p.x - c), a1 = std::atan2(q.y, q.x - c);
  const int n = 20000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = a0 + (a1 - a0) * (i + 0.5) / n;
    s += R / (R * std::sin(t));
  }
  return std::abs(s * (a1 - a0) / n);
}

// Hyperbolic area of {0<=x<=1, above the unit-diameter semicircle, y<=Y} as a
// 2-D midpoint sum of y^-2; x = (1 - cos a) / 2 and y = lo * exp(s) remove
// the endpoint singularity.
double truncated_area_quadrature(double Y) {
  const int n = 800, m = 4000;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = std::numbers::pi * (i + 0.5) / n;
    const double x = 0.5 * (1.0 - std::cos(a)), dx = 0.5 * std::sin(a) * std::numbers::pi / n;
    const double lo = std::sqrt(x * (1.0 - x));
    const double S = std::log(Y / lo);
    double inner = 0.0;
    for (int j = 0; j < m; ++j) {
      const double y = lo * std::exp(S * (j + 0.5) / m);
      inner += y * (S / m) / (y * y);
    }
    total += inner * dx;
  }
  return total;
}

}  // namespace

TEST(Hyperbolic, DistanceExamples) {
  EXPECT_EQ(hyp_distance({0, 1}, {0, 1}), 0.0);
  EXPECT_NEAR(hyp_distance({0, 1}, {0, std::exp(1.0)}), 1.0, 1e-14);
  EXPECT_NEAR(hyp_distance({0, 1}, {1, 1}), geodesic_length_quadrature({0, 1}, {1, 1}), 1e-7);
  EXPECT_NEAR(hyp_distance({0.2, 0.3}, {1.7, 2.0}),
              geodesic_length_quadrature({0.2, 0.3}, {1.7, 2.0}), 1e-7);
}

TEST(Hyperbolic, DistanceMetricAxioms) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-2, 2), uy(0.1, 3);
  for (int i = 0; i < 200; ++i) {
    UHPoint a{ux(rng), uy(rng)}, b{ux(rng), uy(rng)}, c{ux(rng), uy(rng)};
    EXPECT_DOUBLE_EQ(hyp_distance(a, b), hyp_distance(b, a));
    EXPECT_LE(hyp_distance(a, c), hyp_distance(a, b) + hyp_distance(b, c) + 1e-12);
  }
}

TEST(Hyperbolic, Membership) {
  const IdealTriangle T{1.0};
  EXPECT_EQ(T.classify({0.5, 5}), Membership::Interior);
  EXPECT_EQ(T.classify({0, 2}), Membership::Edge0Inf);
  EXPECT_EQ(T.classify({1, 2}), Membership::EdgeRInf);
  EXPECT_EQ(T.classify({0.5, 0.5}), Membership::Edge0R);
  EXPECT_EQ(T.classify({0.5, 0.1}), Membership::Outside);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-0.5, 1.5), uy(0.01, 3);
  const IdealTriangle T3{3.0};
  for (int i = 0; i < 500; ++i) {
    const UHPoint p{ux(rng), uy(rng)};
    EXPECT_EQ(T3.classify({3 * p.x, 3 * p.y}), T.classify(p));
  }
}

TEST(Hyperbolic, DistinguishedPoints) {
  const IdealTriangle T{1.0};
  EXPECT_NEAR(T.center().x, 0.5, 1e-15);
  EXPECT_NEAR(T.center().y, std::sqrt(3.0) / 2, 1e-15);
  const auto f = T.feet();
  EXPECT_EQ(f[0], (UHPoint{0, 1}));
  EXPECT_EQ(f[1], (UHPoint{1, 1}));
  EXPECT_EQ(f[2], (UHPoint{0.5, 0.5}));
  const double d0 = hyp_distance(T.center(), f[0]);
  EXPECT_NEAR(hyp_distance(T.center(), f[1]), d0, 1e-12);
  EXPECT_NEAR(hyp_distance(T.center(), f[2]), d0, 1e-12);
  const IdealTriangle T2{2.0};
  EXPECT_NEAR(T2.center().x, 1.0, 1e-15);
  EXPECT_NEAR(T2.center().y, std::sqrt(3.0), 1e-15);
  EXPECT_EQ(T2.feet()[2], (UHPoint{1, 1}));
}

TEST(Hyperbolic, AltitudesMeetAtCenter) {
  // Altitude from infinity through (1+i)/2 is x = 1/2; from 0 through 1+i is
  // the circle centered 1 of radius 1; from 1 through i the circle centered 0.
  const UHPoint c = IdealTriangle{1.0}.center();
  EXPECT_NEAR(c.x, 0.5, 1e-12);
  EXPECT_NEAR(std::hypot(c.x - 1.0, c.y), 1.0, 1e-12);
  EXPECT_NEAR(std::hypot(c.x, c.y), 1.0, 1e-12);
}

TEST(Hyperbolic, Area) {
  for (double r : {0.3, 1.0, 7.0}) EXPECT_NEAR(IdealTriangle{r}.area(), std::numbers::pi, 1e-12);
  const IdealTriangle T{1.0};
  for (double Y : {2.0, 4.0, 10.0})
    EXPECT_NEAR(T.truncated_area({1e300, 1e300, Y}) / truncated_area_quadrature(Y), 1.0, 1e-6);
  EXPECT_NEAR(T.truncated_area({1e300, 1e300, 1e300}), std::numbers::pi, 1e-12);
}

TEST(Hyperbolic, CuspSymmetry) {
  for (double r : {1.0, 2.5}) {
    const IdealTriangle T{r};
    const Isometry id = T.cusp_symmetry(IdealVertex::Infinity);
    EXPECT_EQ(id.apply({0.3, 0.7}), Cplx(0.3, 0.7));
    for (IdealVertex v : {IdealVertex::Zero, IdealVertex::One}) {
      const Isometry g = T.cusp_symmetry(v);
      EXPECT_TRUE(g.preserves_orientation());
      const double src = v == IdealVertex::Zero ? 0.0 : r;
      EXPECT_TRUE(std::isinf(g.apply_boundary(src)));
      for (double p : {0.0, r, static_cast<double>(INFINITY)}) {
        if (p == src) continue;
        const double q = g.apply_boundary(p);
        EXPECT_TRUE(std::abs(q) < 1e-12 || std::abs(q - r) < 1e-12) << q;
      }
      const Cplx c = T.center().z();
      EXPECT_LT(std::abs(g.apply(c) - c), 1e-12);
    }
  }
}

TEST(Hyperbolic, SymmetryPreservesDistance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(0.05, 0.95), uy(0.6, 4);
  const IdealTriangle T{1.0};
  for (IdealVertex v : {IdealVertex::Zero, IdealVertex::One})
    for (int i = 0; i < 100; ++i) {
      const UHPoint p{ux(rng), uy(rng)}, q{ux(rng), uy(rng)};
      const Isometry g = T.cusp_symmetry(v);
      EXPECT_NEAR(hyp_distance(p, q), hyp_distance(g(p), g(q)), 1e-10);
    }
}

TEST(Hyperbolic, StandardSymmetryTable) {
  const std::array<IdealVertex, 3> V{IdealVertex::Zero, IdealVertex::One, IdealVertex::Infinity};
  std::array<int, 3> perm{0, 1, 2};
  do {
    const std::array<IdealVertex, 3> img{V[perm[0]], V[perm[1]], V[perm[2]]};
    const Isometry g = standard_symmetry(img);
    for (int k = 0; k < 3; ++k) {
      const double got = g.apply_boundary(ideal_vertex_position(V[k]));
      const double want = ideal_vertex_position(img[k]);
      if (std::isinf(want))
        EXPECT_TRUE(std::isinf(got));
      else
        EXPECT_NEAR(got, want, 1e-15);
    }
    // Jacobian agrees with finite differences.
    const Cplx z{0.4, 0.9};
    const Mat2 J = g.jacobian(z);
    const double h = 1e-6;
    const Cplx dx = (g.apply(z + h) - g.apply(z - h)) / (2 * h);
    const Cplx dy = (g.apply(z + Cplx(0, h)) - g.apply(z - Cplx(0, h))) / (2 * h);
    EXPECT_NEAR(J.a, dx.real(), 1e-8);
    EXPECT_NEAR(J.c, dx.imag(), 1e-8);
    EXPECT_NEAR(J.b, dy.real(), 1e-8);
    EXPECT_NEAR(J.d, dy.imag(), 1e-8);
    EXPECT_EQ(J.det() > 0, g.preserves_orientation());
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST(Hyperbolic, Horocycle) {
  const IdealTriangle T{2.0};
  const Horocycle h{T, IdealVertex::Zero, 3.0};
  for (double t : {0.2, 1.0, 1.7}) {
    const UHPoint p = h.point(t);
    EXPECT_NEAR(T.cusp_symmetry(IdealVertex::Zero)(p).y, 3.0, 1e-12);
  }
  EXPECT_TRUE(h.in_horoball({0.01, 0.01}));
  EXPECT_FALSE(h.in_horoball(T.center()));
  const Horocycle top{T, IdealVertex::Infinity, 5.0};
  EXPECT_NEAR(top.point(0.3).y, 5.0, 1e-15);
}

TEST(Hyperbolic, IsometryAlgebra) {
  const Isometry a{2, 1, 1, 1, true}, b{1, -1, 1, 0, false};
  const Cplx z{0.3, 1.1};
  EXPECT_LT(std::abs(a.compose(b).apply(z) - a.apply(b.apply(z))), 1e-13);
  EXPECT_LT(std::abs(a.inverse().apply(a.apply(z)) - z), 1e-13);
  EXPECT_LT(std::abs(b.inverse().apply(b.apply(z)) - z), 1e-13);
}
