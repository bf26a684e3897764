#pragma once

// Quaternionic linear algebra on R^12 = C^6 = H^3, the Hopf fibration
// S^11 -> HP^2 and the curvature tensor of HP^2.
//
// Coordinate layout: coords[2m] + i coords[2m+1] is the m-th complex
// coordinate (m = 0..5) for the structure i. The even coordinates form a
// copy of C^3 whose own complex structure is j: the pairs
// (coords[4l], coords[4l+2]) are the real and j-imaginary parts of the l-th
// coordinate of C^3. A vector of C^3 (6 reals) therefore embeds as the
// "real part" a of a + i b.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ideal {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector of C^3 as 6 reals: (Re w1, Im_j w1, Re w2, Im_j w2, Re w3, Im_j w3).
using C3 = std::array<double, 6>;

inline C3 operator+(const C3& a, const C3& b) {
  C3 r;
  for (std::size_t n = 0; n < 6; ++n) r[n] = a[n] + b[n];
  return r;
}
inline C3 operator-(const C3& a, const C3& b) {
  C3 r;
  for (std::size_t n = 0; n < 6; ++n) r[n] = a[n] - b[n];
  return r;
}
inline C3 operator*(double s, const C3& a) {
  C3 r;
  for (std::size_t n = 0; n < 6; ++n) r[n] = s * a[n];
  return r;
}
inline double dot(const C3& a, const C3& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < 6; ++n) s += a[n] * b[n];
  return s;
}
inline double norm(const C3& a) { return std::sqrt(dot(a, a)); }

/// The complex structure j of C^3.
inline C3 apply_j3(const C3& a) {
  return {-a[1], a[0], -a[3], a[2], -a[5], a[4]};
}

struct AmbientVector {
  std::array<double, 12> coords{};

  double& operator[](std::size_t n) { return coords[n]; }
  double operator[](std::size_t n) const { return coords[n]; }

  AmbientVector& operator+=(const AmbientVector& o) {
    for (std::size_t n = 0; n < 12; ++n) coords[n] += o.coords[n];
    return *this;
  }
  AmbientVector& operator-=(const AmbientVector& o) {
    for (std::size_t n = 0; n < 12; ++n) coords[n] -= o.coords[n];
    return *this;
  }
  AmbientVector& operator*=(double s) {
    for (auto& c : coords) c *= s;
    return *this;
  }
  friend AmbientVector operator+(AmbientVector a, const AmbientVector& b) { return a += b; }
  friend AmbientVector operator-(AmbientVector a, const AmbientVector& b) { return a -= b; }
  friend AmbientVector operator*(double s, AmbientVector a) { return a *= s; }
  friend AmbientVector operator-(AmbientVector a) { return a *= -1.0; }
  bool operator==(const AmbientVector&) const = default;

  /// a + i b with a, b in C^3.
  static AmbientVector embed(const C3& a, const C3& b = {}) {
    AmbientVector v;
    for (std::size_t m = 0; m < 6; ++m) {
      v.coords[2 * m] = a[m];
      v.coords[2 * m + 1] = b[m];
    }
    return v;
  }
  C3 real_part() const {
    C3 a;
    for (std::size_t m = 0; m < 6; ++m) a[m] = coords[2 * m];
    return a;
  }
  C3 imag_part() const {
    C3 b;
    for (std::size_t m = 0; m < 6; ++m) b[m] = coords[2 * m + 1];
    return b;
  }
};

inline double dot(const AmbientVector& a, const AmbientVector& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < 12; ++n) s += a.coords[n] * b.coords[n];
  return s;
}
inline double norm(const AmbientVector& a) { return std::sqrt(dot(a, a)); }
inline double max_abs(const AmbientVector& a) {
  double m = 0.0;
  for (double c : a.coords) m = std::max(m, std::abs(c));
  return m;
}

/// A linear map of R^12 of the form v -> (sign[n] * v[src[n]])_n.
struct SignedPermutation {
  std::array<int, 12> src{};
  std::array<int, 12> sign{};

  constexpr AmbientVector operator()(const AmbientVector& v) const {
    AmbientVector r;
    for (std::size_t n = 0; n < 12; ++n) r.coords[n] = sign[n] * v.coords[src[n]];
    return r;
  }
  /// (*this) o inner.
  constexpr SignedPermutation compose(const SignedPermutation& inner) const {
    SignedPermutation r;
    for (std::size_t n = 0; n < 12; ++n) {
      r.src[n] = inner.src[src[n]];
      r.sign[n] = sign[n] * inner.sign[src[n]];
    }
    return r;
  }
  constexpr SignedPermutation negated() const {
    SignedPermutation r = *this;
    for (auto& s : r.sign) s = -s;
    return r;
  }
  constexpr bool operator==(const SignedPermutation&) const = default;
};

namespace detail {

constexpr SignedPermutation make_i() {
  SignedPermutation p;
  for (int m = 0; m < 6; ++m) {
    p.src[2 * m] = 2 * m + 1;
    p.sign[2 * m] = -1;
    p.src[2 * m + 1] = 2 * m;
    p.sign[2 * m + 1] = 1;
  }
  return p;
}

// (a, b) -> (J a, -J b)
constexpr SignedPermutation make_j() {
  SignedPermutation p;
  for (int l = 0; l < 3; ++l) {
    p.src[4 * l] = 4 * l + 2;
    p.sign[4 * l] = -1;
    p.src[4 * l + 2] = 4 * l;
    p.sign[4 * l + 2] = 1;
    p.src[4 * l + 1] = 4 * l + 3;
    p.sign[4 * l + 1] = 1;
    p.src[4 * l + 3] = 4 * l + 1;
    p.sign[4 * l + 3] = -1;
  }
  return p;
}

}  // namespace detail

enum class Structure { I, J, K };

inline constexpr SignedPermutation kStructureI = detail::make_i();
inline constexpr SignedPermutation kStructureJ = detail::make_j();
inline constexpr SignedPermutation kStructureK = kStructureI.compose(kStructureJ);
inline constexpr std::array<Structure, 3> kStructures{Structure::I, Structure::J, Structure::K};

constexpr const SignedPermutation& structure_map(Structure s) {
  switch (s) {
    case Structure::I: return kStructureI;
    case Structure::J: return kStructureJ;
    default: return kStructureK;
  }
}

inline AmbientVector apply_structure(Structure s, const AmbientVector& v) {
  return structure_map(s)(v);
}

inline const char* structure_name(Structure s) {
  switch (s) {
    case Structure::I: return "i";
    case Structure::J: return "j";
    default: return "k";
  }
}

/// A unit imaginary quaternion a i + b j + c k acting through the structures.
/// Any such element squares to -id; it is how rotated adapted bases are built.
struct QuaternionicStructure {
  std::array<double, 3> coeffs{1.0, 0.0, 0.0};

  AmbientVector operator()(const AmbientVector& v) const {
    AmbientVector r = coeffs[0] * kStructureI(v);
    r += coeffs[1] * kStructureJ(v);
    r += coeffs[2] * kStructureK(v);
    return r;
  }
  /// Imaginary part of the quaternion product (*this)(other); for orthogonal
  /// unit imaginaries the product is itself imaginary.
  QuaternionicStructure times(const QuaternionicStructure& o) const {
    const auto& a = coeffs;
    const auto& b = o.coeffs;
    return {{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]}};
  }
};

/// Unit quaternion q0 + q1 i + q2 j + q3 k acting on R^12 (a fibre element).
inline AmbientVector apply_quaternion(const std::array<double, 4>& q, const AmbientVector& v) {
  AmbientVector r = q[0] * v;
  r += q[1] * kStructureI(v);
  r += q[2] * kStructureJ(v);
  r += q[3] * kStructureK(v);
  return r;
}

/// A point of S^11; the outward normal of the sphere is the point itself.
class SpherePoint {
 public:
  explicit SpherePoint(const AmbientVector& v) : vector_(v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw GeometryError("SpherePoint: zero or non-finite vector");
    vector_ *= 1.0 / n;
  }
  const AmbientVector& vector() const { return vector_; }

 private:
  AmbientVector vector_;
};

struct HorizontalSplit {
  AmbientVector horizontal;
  AmbientVector vertical;
  double radial = 0.0;
};

/// Orthogonal decomposition of w at p into horizontal, fibre and radial parts.
inline HorizontalSplit split_horizontal(const SpherePoint& p, const AmbientVector& w) {
  const AmbientVector& x = p.vector();
  HorizontalSplit out;
  out.radial = dot(w, x);
  for (Structure s : kStructures) {
    const AmbientVector sx = apply_structure(s, x);
    out.vertical += dot(w, sx) * sx;
  }
  out.horizontal = w - out.vertical - out.radial * x;
  return out;
}

inline AmbientVector horizontal_part(const SpherePoint& p, const AmbientVector& w) {
  return split_horizontal(p, w).horizontal;
}

/// Base point with its fibre directions and the induced local basis {I, J, K}
/// of the quaternionic bundle of HP^2.
class HP2Frame {
 public:
  static constexpr double kHorizontalTolerance = 1e-8;

  explicit HP2Frame(SpherePoint base)
      : base_(std::move(base)),
        vertical_{kStructureI(base_.vector()), kStructureJ(base_.vector()),
                  kStructureK(base_.vector())} {}

  const SpherePoint& base() const { return base_; }
  const AmbientVector& vertical(Structure s) const { return vertical_[static_cast<int>(s)]; }

  /// Norm of the non-horizontal part of w, relative to max(1, |w|).
  double horizontality_residual(const AmbientVector& w) const {
    const auto split = split_horizontal(base_, w);
    const double off = std::sqrt(dot(split.vertical, split.vertical) + split.radial * split.radial);
    return off / std::max(1.0, norm(w));
  }

  void require_horizontal(const AmbientVector& w, const char* what) const {
    if (horizontality_residual(w) > kHorizontalTolerance)
      throw GeometryError(std::string(what) + ": vector is not horizontal");
  }

  /// Horizontal representative of I, J or K applied to d(pi)(w).
  AmbientVector induced(Structure s, const AmbientVector& w) const {
    require_horizontal(w, "induced_structure");
    return horizontal_part(base_, apply_structure(s, w));
  }
  AmbientVector induced(const QuaternionicStructure& s, const AmbientVector& w) const {
    require_horizontal(w, "induced_structure");
    return horizontal_part(base_, s(w));
  }

 private:
  SpherePoint base_;
  std::array<AmbientVector, 3> vertical_;
};

inline AmbientVector induced_structure(const HP2Frame& frame, Structure s, const AmbientVector& w) {
  return frame.induced(s, w);
}

/// Curvature of HP^2 with constant Q-sectional curvature 4:
/// R(X,Y)Z = D(Y,Z)X - D(X,Z)Y - 2 G(X,Y)Z with
/// D(Y,Z)X = g(Y,Z)X + sum_s g(sY,Z) sX and G(X,Y)Z = sum_s g(sX,Y) sZ.
inline AmbientVector curvature_hp2(const HP2Frame& frame, const AmbientVector& x,
                                   const AmbientVector& y, const AmbientVector& z) {
  frame.require_horizontal(x, "curvature_hp2");
  frame.require_horizontal(y, "curvature_hp2");
  frame.require_horizontal(z, "curvature_hp2");
  AmbientVector r = dot(y, z) * x - dot(x, z) * y;
  for (Structure s : kStructures) {
    const AmbientVector sx = frame.induced(s, x);
    const AmbientVector sy = frame.induced(s, y);
    const AmbientVector sz = frame.induced(s, z);
    r += dot(sy, z) * sx;
    r -= dot(sx, z) * sy;
    r -= 2.0 * dot(sx, y) * sz;
  }
  return r;
}

}  // namespace ideal
