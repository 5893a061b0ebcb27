#pragma once

// Upper half-plane primitives and the geometry of the scaled ideal
// triangles rT (convex hull of 0, r and infinity).

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace ihm {

using Cplx = std::complex<double>;

struct UHPoint {
  double x = 0.0;
  double y = 1.0;

  Cplx z() const { return {x, y}; }
  static UHPoint from(Cplx z) { return {z.real(), z.imag()}; }
  friend bool operator==(const UHPoint&, const UHPoint&) = default;
};

/// Real 2x2 matrix, row major. Used for Jacobians of chart maps.
struct Mat2 {
  double a = 1, b = 0, c = 0, d = 1;

  double det() const { return a * d - b * c; }
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  std::array<double, 2> operator*(const std::array<double, 2>& v) const {
    return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
  }
  Mat2 inverse() const {
    const double k = det();
    return {d / k, -b / k, -c / k, a / k};
  }
  Mat2 transpose() const { return {a, c, b, d}; }
};

/// Hyperbolic distance in the upper half-plane.
inline double hyp_distance(const UHPoint& p, const UHPoint& q) {
  const double dx = p.x - q.x, dy = p.y - q.y;
  const double chord = std::sqrt(dx * dx + dy * dy);
  return 2.0 * std::asinh(chord / (2.0 * std::sqrt(p.y * q.y)));
}

/// Klein (projective) disc coordinates of a point, via the Cayley map to the
/// Poincare disc. Geodesics become chords; 0, 1 and infinity go to -1, -i, 1.
inline std::array<double, 2> to_klein(const UHPoint& p) {
  const Cplx z = p.z();
  const Cplx w = (z - Cplx(0.0, 1.0)) / (z + Cplx(0.0, 1.0));
  const double s = 2.0 / (1.0 + std::norm(w));
  return {s * w.real(), s * w.imag()};
}

inline UHPoint from_klein(const std::array<double, 2>& k) {
  const double r2 = k[0] * k[0] + k[1] * k[1];
  const Cplx w = Cplx(k[0], k[1]) / (1.0 + std::sqrt(std::max(0.0, 1.0 - r2)));
  return UHPoint::from(Cplx(0.0, 1.0) * (1.0 + w) / (1.0 - w));
}

/// Isometry of the upper half-plane with real coefficients:
/// z -> (a w + b) / (c w + d) where w = z, or w = conj(z) when `anti`.
/// Orientation preserving maps have ad - bc > 0, reversing ones ad - bc < 0.
struct Isometry {
  double a = 1, b = 0, c = 0, d = 1;
  bool anti = false;

  static Isometry identity() { return {}; }
  static Isometry scaling(double r) { return {r, 0, 0, 1, false}; }
  static Isometry translation(double t) { return {1, t, 0, 1, false}; }

  Cplx apply(Cplx z) const {
    const Cplx w = anti ? std::conj(z) : z;
    if (c == 0.0) return (a * w + b) / d;
    return (a * w + b) / (c * w + d);
  }
  UHPoint operator()(const UHPoint& p) const { return UHPoint::from(apply(p.z())); }

  /// Image of a boundary point; infinity is encoded as +inf.
  double apply_boundary(double t) const {
    if (std::isinf(t)) return c == 0.0 ? INFINITY : a / c;
    const double den = c * t + d;
    if (den == 0.0) return INFINITY;
    return (a * t + b) / den;
  }

  Isometry inverse() const {
    const double k = a * d - b * c;
    return {d / k, -b / k, -c / k, a / k, anti};
  }

  /// (*this) o other
  Isometry compose(const Isometry& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d,
            anti != o.anti};
  }

  /// Real Jacobian of the map at z.
  Mat2 jacobian(Cplx z) const {
    const Cplx w = anti ? std::conj(z) : z;
    const Cplx den = c * w + d;
    const Cplx dm = (a * d - b * c) / (den * den);
    Mat2 j{dm.real(), -dm.imag(), dm.imag(), dm.real()};
    if (anti) j = j * Mat2{1, 0, 0, -1};
    return j;
  }

  bool preserves_orientation() const { return !anti; }
};

/// Labels of the three ideal vertices of the standard triangle: 0, 1 and infinity.
enum class IdealVertex : int { Zero = 0, One = 1, Infinity = 2 };

inline double ideal_vertex_position(IdealVertex v) {
  switch (v) {
    case IdealVertex::Zero: return 0.0;
    case IdealVertex::One: return 1.0;
    case IdealVertex::Infinity: return INFINITY;
  }
  return 0.0;
}

/// The unique isometry of the standard triangle realizing a permutation of
/// its ideal vertices; `images[k]` is where vertex k goes.
inline Isometry standard_symmetry(const std::array<IdealVertex, 3>& images) {
  const int p0 = static_cast<int>(images[0]);
  const int p1 = static_cast<int>(images[1]);
  const int key = p0 * 3 + p1;
  switch (key) {
    case 0 * 3 + 1: return {1, 0, 0, 1, false};    // identity
    case 1 * 3 + 0: return {-1, 1, 0, 1, true};    // 1 - conj(z)
    case 2 * 3 + 1: return {0, 1, 1, 0, true};     // 1 / conj(z)
    case 0 * 3 + 2: return {1, 0, 1, -1, true};    // conj(z) / (conj(z) - 1)
    case 1 * 3 + 2: return {0, 1, -1, 1, false};   // 1 / (1 - z)
    case 2 * 3 + 0: return {1, -1, 1, 0, false};   // (z - 1) / z
    default: break;
  }
  return {};
}

/// Horocyclic height of a point of the standard triangle measured from cusp
/// `v`: the imaginary part after any symmetry carrying `v` to infinity.
inline double cusp_level(IdealVertex v, Cplx z) {
  switch (v) {
    case IdealVertex::Infinity: return z.imag();
    case IdealVertex::Zero: return z.imag() / std::norm(z);
    case IdealVertex::One: return z.imag() / std::norm(z - 1.0);
  }
  return 0.0;
}

enum class Membership { Interior, Edge0Inf, EdgeRInf, Edge0R, Outside };

/// The ideal triangle rT.
struct IdealTriangle {
  double scale = 1.0;

  Membership classify(const UHPoint& p, double tol = 1e-12) const {
    const double r = scale;
    const double t = tol * std::max(1.0, r);
    if (p.y <= 0.0) return Membership::Outside;
    const double circ = std::hypot(p.x - 0.5 * r, p.y) - 0.5 * r;
    if (p.x < -t || p.x > r + t || circ < -t) return Membership::Outside;
    if (std::abs(p.x) <= t) return Membership::Edge0Inf;
    if (std::abs(p.x - r) <= t) return Membership::EdgeRInf;
    if (std::abs(circ) <= t) return Membership::Edge0R;
    return Membership::Interior;
  }

  UHPoint center() const { return {0.5 * scale, 0.5 * std::sqrt(3.0) * scale}; }

  /// Feet of the altitudes on the sides 0-inf, r-inf and 0-r.
  std::array<UHPoint, 3> feet() const {
    return {UHPoint{0.0, scale}, UHPoint{scale, scale}, UHPoint{0.5 * scale, 0.5 * scale}};
  }

  double area() const { return std::numbers::pi; }

  /// Area of the triangle with the horoball above `level` removed at each
  /// cusp; a cusp band of width 1 above height L has area 1/L. Levels are
  /// measured in the standard triangle, so they are scale invariant. Levels
  /// must be at least 1 so that the removed horoballs are disjoint.
  double truncated_area(const std::array<double, 3>& levels) const {
    return std::numbers::pi - 1.0 / levels[0] - 1.0 / levels[1] - 1.0 / levels[2];
  }

  /// Orientation preserving symmetry of rT sending `cusp` to infinity;
  /// cusps are labeled as for the standard triangle (One stands for r).
  Isometry cusp_symmetry(IdealVertex cusp) const {
    Isometry g;
    switch (cusp) {
      case IdealVertex::Infinity: return Isometry::identity();
      case IdealVertex::Zero:
        g = standard_symmetry({IdealVertex::Infinity, IdealVertex::Zero, IdealVertex::One});
        break;
      case IdealVertex::One:
        g = standard_symmetry({IdealVertex::One, IdealVertex::Infinity, IdealVertex::Zero});
        break;
    }
    return Isometry::scaling(scale).compose(g).compose(Isometry::scaling(1.0 / scale));
  }
};

/// Horocycle around a cusp of rT: the image of the horizontal line at height
/// `level` (in the coordinates of rT) under the inverse cusp symmetry.
struct Horocycle {
  IdealTriangle triangle;
  IdealVertex cusp = IdealVertex::Infinity;
  double level = 1.0;

  /// Point of the horocycle whose coordinate along the line y = level is t.
  UHPoint point(double t) const {
    const Isometry g = triangle.cusp_symmetry(cusp).inverse();
    return g(UHPoint{t, level});
  }

  /// True when p lies strictly inside the horoball bounded by this horocycle.
  bool in_horoball(const UHPoint& p) const {
    const Isometry g = triangle.cusp_symmetry(cusp);
    return g(p).y > level;
  }
};

}  // namespace ihm
