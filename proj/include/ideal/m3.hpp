#pragma once

// Geometric data of a minimal delta(2)-ideal Lagrangian M^3 in C^3 on a
// (u, v, t) lattice: frame, connection coefficients, lambda, second
// fundamental form, and the intrinsic invariants tau and delta(2).
//
// Frame convention: h(E1,E1) = lambda jE1, h(E1,E2) = -lambda jE2,
// h(E2,E2) = -lambda jE1, h(., E3) = 0, and nabla_{E_i} E_j = sum_k
// gamma_ij^k E_k with the table of connection_table().

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ideal/elliptic.hpp"
#include "ideal/grid.hpp"
#include "ideal/json_io.hpp"
#include "ideal/parallel.hpp"
#include "ideal/quaternionic.hpp"
#include "ideal/report.hpp"

namespace ideal {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;
using Tensor3 = std::array<Mat3, 3>;

struct TAxis {
  double t0 = 0.5;
  double t1 = 2.0;
  int nt = 9;

  void validate() const {
    if (nt < 3) throw GridError("t-axis needs at least 3 nodes");
    if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0)) throw GridError("t-axis needs finite t0 < t1");
  }
  double h() const { return (t1 - t0) / (nt - 1); }
  double t(int k) const { return t0 + h() * k; }
  bool operator==(const TAxis&) const = default;
};

enum class Regime { Integrable, NonIntegrable };

inline const char* regime_name(Regime r) { return r == Regime::Integrable ? "integrable" : "nonintegrable"; }

struct NodeGeometry {
  double g11_2 = 0.0;  // gamma_11^2
  double g21_2 = 0.0;  // gamma_21^2
  double g11_3 = 0.0;  // gamma_11^3
  double g21_3 = 0.0;  // gamma_21^3
  double lambda = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  Mat3 frame{};  // frame[i][a]: d_a component of E_{i+1}, a = (u, v, t)
};

/// gamma[i][j][k] = g(nabla_{E_{i+1}} E_{j+1}, E_{k+1}).
inline Tensor3 connection_table(const NodeGeometry& n) {
  const double A = n.g11_2, B = n.g21_2, G = n.g11_3, C = n.g21_3;
  Tensor3 g{};
  g[0][0][1] = A;
  g[0][0][2] = G;
  g[0][1][0] = -A;
  g[0][1][2] = -C;
  g[0][2][0] = -G;
  g[0][2][1] = C;
  g[1][0][1] = B;
  g[1][0][2] = C;
  g[1][1][0] = -B;
  g[1][1][2] = G;
  g[1][2][0] = -C;
  g[1][2][1] = -G;
  g[2][0][1] = C / 3.0;
  g[2][1][0] = -C / 3.0;
  return g;
}

/// H[i][j][k]: coefficient of jE_{k+1} in h(E_{i+1}, E_{j+1}).
inline Tensor3 second_fundamental_tensor(double lambda) {
  Tensor3 h{};
  h[0][0][0] = lambda;
  h[0][1][1] = -lambda;
  h[1][0][1] = -lambda;
  h[1][1][0] = -lambda;
  return h;
}

/// h(X, Y) for X, Y in frame coordinates; returns the jE_k coefficients.
inline Vec3 second_fundamental_form(double lambda, const Vec3& x, const Vec3& y) {
  const Tensor3 h = second_fundamental_tensor(lambda);
  Vec3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[k] += x[i] * y[j] * h[i][j][k];
  return r;
}

inline Vec3 second_fundamental_form(const NodeGeometry& n, const Vec3& x, const Vec3& y) {
  return second_fundamental_form(n.lambda, x, y);
}

/// Sum of h(E_i, E_i); zero for a minimal immersion.
inline Vec3 mean_curvature_trace(const NodeGeometry& n) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i) {
    Vec3 e{};
    e[i] = 1.0;
    const Vec3 hi = second_fundamental_form(n, e, e);
    for (int k = 0; k < 3; ++k) r[k] += hi[k];
  }
  return r;
}

/// Sectional curvature of the plane spanned by orthonormal X, Y (flat
/// ambient): <h(X,X), h(Y,Y)> - |h(X,Y)|^2, expanded for the h above.
inline double sectional_curvature(const NodeGeometry& n, const Vec3& x, const Vec3& y) {
  const double a = x[0] * x[0] - x[1] * x[1], b = 2.0 * x[0] * x[1];
  const double c = y[0] * y[0] - y[1] * y[1], d = 2.0 * y[0] * y[1];
  const double p = x[0] * y[0] - x[1] * y[1], q = x[0] * y[1] + x[1] * y[0];
  return n.lambda * n.lambda * (a * c + b * d - p * p - q * q);
}

/// Same quantity through the generic bilinear form; used to cross-check.
inline double sectional_curvature_generic(const NodeGeometry& n, const Vec3& x, const Vec3& y) {
  const Vec3 hxx = second_fundamental_form(n, x, x);
  const Vec3 hyy = second_fundamental_form(n, y, y);
  const Vec3 hxy = second_fundamental_form(n, x, y);
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += hxx[k] * hyy[k] - hxy[k] * hxy[k];
  return s;
}

/// Closed-form node data of the integrable regime from F and its first derivatives.
inline NodeGeometry integrable_geometry(double f, double fu, double fv, double t) {
  NodeGeometry n;
  const double alpha = t * std::exp(-f / 3.0);
  n.alpha1 = alpha;
  n.lambda = std::exp(f) / t;
  n.g11_3 = -1.0 / t;
  n.g21_3 = 0.0;
  // d_u = alpha (E1 + E2) / sqrt2, d_v = alpha (E2 - E1) / sqrt2
  const double c = 1.0 / (std::numbers::sqrt2 * alpha);
  n.g11_2 = (fu + fv) * c / 3.0;
  n.g21_2 = -(fu - fv) * c / 3.0;
  n.frame[0] = {c, -c, 0.0};
  n.frame[1] = {c, c, 0.0};
  n.frame[2] = {0.0, 0.0, 1.0};
  return n;
}

struct M3Data {
  GridSpec grid;
  TAxis taxis;
  Regime regime = Regime::Integrable;
  ScalarField2D F, F_u, F_v;
  std::optional<ScalarField2D> C;
  std::vector<double> beta1, beta2;  // non-integrable regime, per node
  std::vector<NodeGeometry> nodes;   // index(ix, iy, k)
  std::vector<ResidualReport> diagnostics;

  std::size_t node_count() const { return grid.size() * static_cast<std::size_t>(taxis.nt); }
  std::size_t index(int ix, int iy, int k) const {
    return static_cast<std::size_t>(k) * grid.size() + grid.index(ix, iy);
  }
  const NodeGeometry& at(int ix, int iy, int k) const { return nodes[index(ix, iy, k)]; }
  std::array<double, 3> spacing() const { return {grid.hx, grid.hy, taxis.h()}; }
  double h() const { return std::max(grid.h(), taxis.h()); }
};

namespace detail {

// Second-order derivative of a node quantity along axis a (0 = u, 1 = v, 2 = t).
template <class Get>
double lattice_derivative(const M3Data& d, Get&& get, int ix, int iy, int k, int a) {
  const int n[3] = {d.grid.nx, d.grid.ny, d.taxis.nt};
  const double h = d.spacing()[a];
  int p[3] = {ix, iy, k};
  auto val = [&](int off) {
    int q[3] = {p[0], p[1], p[2]};
    q[a] += off;
    return get(q[0], q[1], q[2]);
  };
  if (p[a] == 0) return (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h);
  if (p[a] == n[a] - 1) return (3.0 * val(0) - 4.0 * val(-1) + val(-2)) / (2.0 * h);
  return (val(1) - val(-1)) / (2.0 * h);
}

inline bool lattice_interior(const M3Data& d, int ix, int iy, int k) {
  return d.grid.interior(ix, iy) && k > 0 && k < d.taxis.nt - 1;
}

}  // namespace detail

/// Algebraic relations of the connection coefficients at every node.
inline std::vector<ResidualReport> connection_relation_reports(const M3Data& d, double tol = 1e-10) {
  std::vector<double> skew, diag, anti, vanish, third;
  for (const auto& n : d.nodes) {
    const Tensor3 g = connection_table(n);
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) s = std::max(s, std::abs(g[i][j][k] + g[i][k][j]));
    skew.push_back(s);
    diag.push_back(g[0][0][2] - g[1][1][2]);
    anti.push_back(g[0][1][2] + g[1][0][2]);
    vanish.push_back(std::max(std::abs(g[2][2][0]), std::abs(g[2][2][1])));
    third.push_back(g[2][0][1] + g[0][1][2] / 3.0);
  }
  const double h = d.h();
  return {ResidualReport::from_samples("gamma_skew", skew, h, tol),
          ResidualReport::from_samples("gamma_11_3_minus_22_3", diag, h, tol),
          ResidualReport::from_samples("gamma_12_3_plus_21_3", anti, h, tol),
          ResidualReport::from_samples("gamma_33_12_vanish", vanish, h, tol),
          ResidualReport::from_samples("gamma_31_2_plus_third_12_3", third, h, tol)};
}

inline ResidualReport mean_curvature_report(const M3Data& d, double tol = 1e-12) {
  std::vector<double> s;
  for (const auto& n : d.nodes) {
    const Vec3 t = mean_curvature_trace(n);
    s.push_back(std::max({std::abs(t[0]), std::abs(t[1]), std::abs(t[2])}));
  }
  return ResidualReport::from_samples("mean_curvature_trace", s, d.h(), tol);
}

/// A per-node residual on the lattice; NaN where it is not evaluated.
struct LatticeField {
  std::string name;
  std::vector<double> values;
};

/// Largest |value| over evaluated nodes whose indices are multiples of the
/// strides, i.e. the nodes shared with a coarser lattice. `margin` drops that
/// many nodes next to each (u, v) edge.
inline double lattice_max(const M3Data& d, const LatticeField& f, int stride_uv = 1, int stride_t = 1,
                          int margin = 0) {
  double m = 0.0;
  for (int k = 0; k < d.taxis.nt; k += stride_t)
    for (int iy = margin; iy < d.grid.ny - margin; iy += stride_uv)
      for (int ix = margin; ix < d.grid.nx - margin; ix += stride_uv) {
        const double x = f.values[d.index(ix, iy, k)];
        if (!std::isnan(x)) m = std::max(m, std::abs(x));
      }
  return m;
}

inline ResidualReport lattice_report(const M3Data& d, const LatticeField& f, double tol) {
  std::vector<double> s;
  for (double x : f.values)
    if (!std::isnan(x)) s.push_back(x);
  return ResidualReport::from_samples(f.name, s, d.h(), tol);
}

/// The three first-order equations for lambda, evaluated with finite
/// differences along the frame and divided by lambda. Interior nodes only.
inline std::vector<LatticeField> lambda_equation_fields(const M3Data& d) {
  auto log_lambda = [&](int ix, int iy, int k) { return std::log(d.at(ix, iy, k).lambda); };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<LatticeField> out{{"lambda_eq_E1", std::vector<double>(d.node_count(), nan)},
                                {"lambda_eq_E2", std::vector<double>(d.node_count(), nan)},
                                {"lambda_eq_E3", std::vector<double>(d.node_count(), nan)}};
  for (int k = 1; k < d.taxis.nt - 1; ++k)
    for (int iy = 1; iy < d.grid.ny - 1; ++iy)
      for (int ix = 1; ix < d.grid.nx - 1; ++ix) {
        const auto& n = d.at(ix, iy, k);
        Vec3 grad;
        for (int a = 0; a < 3; ++a) grad[a] = detail::lattice_derivative(d, log_lambda, ix, iy, k, a);
        Vec3 e{};
        for (int i = 0; i < 3; ++i)
          for (int a = 0; a < 3; ++a) e[i] += n.frame[i][a] * grad[a];
        const std::size_t id = d.index(ix, iy, k);
        out[0].values[id] = e[0] + 3.0 * n.g21_2;
        out[1].values[id] = e[1] - 3.0 * n.g11_2;
        out[2].values[id] = e[2] - n.g11_3;
      }
  return out;
}

/// Torsion-free bracket identities of the frame, with finite-difference
/// brackets of the coordinate expressions:
///   [E1,E3] = -g11_3 E1 + (2/3) g21_3 E2
///   [E2,E3] = -(2/3) g21_3 E1 - g11_3 E2
///   [E1,E2] = -g11_2 E1 - g21_2 E2 - 2 g21_3 E3
inline std::vector<LatticeField> bracket_fields(const M3Data& d) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<LatticeField> out{{"bracket_E1_E3", std::vector<double>(d.node_count(), nan)},
                                {"bracket_E2_E3", std::vector<double>(d.node_count(), nan)},
                                {"bracket_E1_E2", std::vector<double>(d.node_count(), nan)}};
  for (int k = 1; k < d.taxis.nt - 1; ++k)
    for (int iy = 1; iy < d.grid.ny - 1; ++iy)
      for (int ix = 1; ix < d.grid.nx - 1; ++ix) {
        const auto& n = d.at(ix, iy, k);
        // dc[i][a][b] = d_b (frame[i][a])
        double dc[3][3][3];
        for (int i = 0; i < 3; ++i)
          for (int a = 0; a < 3; ++a) {
            auto get = [&](int x, int y, int z) { return d.at(x, y, z).frame[i][a]; };
            for (int b = 0; b < 3; ++b) dc[i][a][b] = detail::lattice_derivative(d, get, ix, iy, k, b);
          }
        Eigen::Matrix3d m;
        for (int i = 0; i < 3; ++i)
          for (int a = 0; a < 3; ++a) m(a, i) = n.frame[i][a];
        const Eigen::Matrix3d minv = m.inverse();
        auto bracket = [&](int i, int j) {
          Eigen::Vector3d v;
          for (int a = 0; a < 3; ++a) {
            double s = 0.0;
            for (int b = 0; b < 3; ++b) s += n.frame[i][b] * dc[j][a][b] - n.frame[j][b] * dc[i][a][b];
            v[a] = s;
          }
          return Eigen::Vector3d(minv * v);
        };
        const double A = n.g11_2, B = n.g21_2, G = n.g11_3, C = n.g21_3;
        const Eigen::Vector3d e13(-G, 2.0 * C / 3.0, 0.0);
        const Eigen::Vector3d e23(-2.0 * C / 3.0, -G, 0.0);
        const Eigen::Vector3d e12(-A, -B, -2.0 * C);
        const std::size_t id = d.index(ix, iy, k);
        out[0].values[id] = (bracket(0, 2) - e13).cwiseAbs().maxCoeff();
        out[1].values[id] = (bracket(1, 2) - e23).cwiseAbs().maxCoeff();
        out[2].values[id] = (bracket(0, 1) - e12).cwiseAbs().maxCoeff();
      }
  return out;
}

inline std::vector<ResidualReport> fd_reports(const M3Data& d, const std::vector<LatticeField>& fields,
                                              double tol_factor) {
  const double h = d.h();
  std::vector<ResidualReport> out;
  for (const auto& f : fields) out.push_back(lattice_report(d, f, tol_factor * h * h));
  return out;
}

struct BuildOptions {
  double pde_tolerance = 1e-8;
  bool check_pde = true;
  double fd_tol_factor = 10.0;  // O(h^2) residual tolerances are fd_tol_factor * h^2
};

inline M3Data build_integrable(const ScalarField2D& f, const TAxis& taxis, const BuildOptions& opts = {}) {
  f.validate();
  taxis.validate();
  if (!(taxis.t0 > 0.0)) throw PreconditionError("integrable regime requires t0 > 0 (t-axis must not cross 0)");
  if (opts.check_pde) {
    const double r = max_norm_interior(residual(Pde::ideal_f(), f));
    if (!(r <= opts.pde_tolerance))
      throw PreconditionError("F does not solve the IdealF equation: residual " + std::to_string(r));
  }
  M3Data d;
  d.grid = f.grid;
  d.taxis = taxis;
  d.regime = Regime::Integrable;
  d.F = f;
  d.F.name = "F";
  d.F_u = derivative_u(f, "F_u");
  d.F_v = derivative_v(f, "F_v");
  d.nodes.resize(d.node_count());
  for (int k = 0; k < taxis.nt; ++k)
    for (int iy = 0; iy < d.grid.ny; ++iy)
      for (int ix = 0; ix < d.grid.nx; ++ix)
        d.nodes[d.index(ix, iy, k)] = integrable_geometry(f(ix, iy), d.F_u(ix, iy), d.F_v(ix, iy), taxis.t(k));
  auto add = [&](std::vector<ResidualReport> rs) {
    for (auto& r : rs) d.diagnostics.push_back(std::move(r));
  };
  add(connection_relation_reports(d));
  d.diagnostics.push_back(mean_curvature_report(d));
  add(fd_reports(d, lambda_equation_fields(d), opts.fd_tol_factor));
  add(fd_reports(d, bracket_fields(d), opts.fd_tol_factor));
  return d;
}

/// Phase continuation of the cube root (alpha1 + j alpha2)^3 = z: principal
/// branch at the first node, then the root nearest the predecessor's.
class CubeRootContinuation {
 public:
  static constexpr double kMaxJump = std::numbers::pi / 3.0;

  static std::complex<double> principal(std::complex<double> z) { return std::pow(z, 1.0 / 3.0); }

  /// Throws GeometryError if the nearest root is a jump of pi/3 or more.
  static std::complex<double> continue_from(std::complex<double> prev, std::complex<double> z) {
    const std::complex<double> r0 = principal(z);
    const std::complex<double> w = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    std::complex<double> best = r0;
    double best_angle = std::numeric_limits<double>::infinity();
    std::complex<double> r = r0;
    for (int m = 0; m < 3; ++m, r *= w) {
      const double ang = std::abs(std::arg(r / prev));
      if (ang < best_angle) {
        best_angle = ang;
        best = r;
      }
    }
    if (best_angle >= kMaxJump * (1.0 - 1e-9))
      throw GeometryError("cube-root branch discontinuity: phase jump " + std::to_string(best_angle) +
                          " between adjacent nodes");
    return best;
  }
};

inline M3Data build_nonintegrable(const ScalarField2D& f, const ScalarField2D& c, const TAxis& taxis,
                                  std::vector<double> beta1 = {}, std::vector<double> beta2 = {},
                                  const BuildOptions& opts = {}) {
  f.validate();
  c.validate();
  require_same_grid(f, c);
  taxis.validate();
  const bool all_zero = std::all_of(c.values.begin(), c.values.end(), [](double x) { return x == 0.0; });
  if (all_zero) throw PreconditionError("non-integrable regime requires C not identically zero");
  if (opts.check_pde) {
    const double rf = max_norm_interior(residual(Pde::ideal_f(), f));
    if (!(rf <= opts.pde_tolerance))
      throw PreconditionError("F does not solve the IdealF equation: residual " + std::to_string(rf));
    const double rc = max_norm_interior(residual(Pde::linear_c(f), c));
    if (!(rc <= opts.pde_tolerance))
      throw PreconditionError("C does not solve the LinearC equation: residual " + std::to_string(rc));
  }
  M3Data d;
  d.grid = f.grid;
  d.taxis = taxis;
  d.regime = Regime::NonIntegrable;
  d.F = f;
  d.F.name = "F";
  d.F_u = derivative_u(f, "F_u");
  d.F_v = derivative_v(f, "F_v");
  d.C = c;
  d.C->name = "C";
  const std::size_t count = d.node_count();
  if (beta1.empty()) beta1.assign(count, 0.0);
  if (beta2.empty()) beta2.assign(count, 0.0);
  if (beta1.size() != count || beta2.size() != count)
    throw PreconditionError("beta1/beta2 must have one value per lattice node");
  d.beta1 = std::move(beta1);
  d.beta2 = std::move(beta2);
  const ScalarField2D c_u = derivative_u(c, "C_u");
  const ScalarField2D c_v = derivative_v(c, "C_v");

  d.nodes.resize(count);
  std::vector<std::complex<double>> root(count);
  for (int k = 0; k < taxis.nt; ++k)
    for (int iy = 0; iy < d.grid.ny; ++iy)
      for (int ix = 0; ix < d.grid.nx; ++ix) {
        const std::size_t id = d.index(ix, iy, k);
        const double t = taxis.t(k);
        const double cv = c(ix, iy);
        const double s = t * t + cv * cv;
        if (!(s > 0.0)) throw GeometryError("t^2 + C^2 vanishes at a lattice node");
        NodeGeometry& n = d.nodes[id];
        n.g11_3 = -t / s;
        n.g21_3 = -cv / s;
        n.lambda = std::exp(f(ix, iy)) / std::sqrt(s);
        // The quaternion j acts on alpha1 + j alpha2 as the imaginary unit.
        const std::complex<double> gam(n.g11_3, -n.g21_3);
        const std::complex<double> z = 1.0 / (n.lambda * gam * gam);
        if (ix == 0 && iy == 0 && k == 0) {
          root[id] = CubeRootContinuation::principal(z);
        } else {
          const std::size_t prev = ix > 0 ? d.index(ix - 1, iy, k) : iy > 0 ? d.index(0, iy - 1, k) : d.index(0, 0, k - 1);
          root[id] = CubeRootContinuation::continue_from(root[prev], z);
        }
        n.alpha1 = root[id].real();
        n.alpha2 = root[id].imag();
        const double m2 = n.alpha1 * n.alpha1 + n.alpha2 * n.alpha2;
        n.frame[0] = {n.alpha1 / m2, -n.alpha2 / m2, -d.beta1[id]};
        n.frame[1] = {n.alpha2 / m2, n.alpha1 / m2, -d.beta2[id]};
        n.frame[2] = {0.0, 0.0, 1.0};
        // E_i(log lambda) with log lambda = F - log(t^2 + C^2) / 2.
        const Vec3 grad{d.F_u(ix, iy) - cv * c_u(ix, iy) / s, d.F_v(ix, iy) - cv * c_v(ix, iy) / s, -t / s};
        double e1 = 0.0, e2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          e1 += n.frame[0][a] * grad[a];
          e2 += n.frame[1][a] * grad[a];
        }
        n.g11_2 = e2 / 3.0;
        n.g21_2 = -e1 / 3.0;
      }

  // Closed-form invariants.
  std::vector<double> modulus, w_res, beta_res;
  for (int k = 0; k < taxis.nt; ++k)
    for (int iy = 0; iy < d.grid.ny; ++iy)
      for (int ix = 0; ix < d.grid.nx; ++ix) {
        const auto& n = d.at(ix, iy, k);
        const double t = taxis.t(k);
        const double cv = c(ix, iy);
        const double s = t * t + cv * cv;
        const double m2 = n.alpha1 * n.alpha1 + n.alpha2 * n.alpha2;
        const double expect = std::exp(-2.0 * f(ix, iy) / 3.0) * s;
        modulus.push_back((m2 - expect) / expect);
        const double gg = n.g11_3 * n.g11_3 + n.g21_3 * n.g21_3;
        w_res.push_back(n.g11_3 / gg + t);
      }
  // beta_i = E_i(w) with w = -t.
  for (int k = 0; k < taxis.nt; ++k)
    for (int iy = 0; iy < d.grid.ny; ++iy)
      for (int ix = 0; ix < d.grid.nx; ++ix) {
        const auto& n = d.at(ix, iy, k);
        const std::size_t id = d.index(ix, iy, k);
        beta_res.push_back(std::max(std::abs(d.beta1[id] + n.frame[0][2]), std::abs(d.beta2[id] + n.frame[1][2])));
      }
  const double h = d.h();
  d.diagnostics.push_back(ResidualReport::from_samples("alpha_modulus", modulus, h, 1e-12));
  d.diagnostics.push_back(ResidualReport::from_samples("w_equals_minus_t", w_res, h, 1e-12));
  d.diagnostics.push_back(ResidualReport::from_samples("beta_definition", beta_res, h, 1e-12));
  for (auto& r : connection_relation_reports(d)) d.diagnostics.push_back(std::move(r));
  d.diagnostics.push_back(mean_curvature_report(d));
  for (auto& r : fd_reports(d, lambda_equation_fields(d), opts.fd_tol_factor)) d.diagnostics.push_back(std::move(r));
  for (auto& r : fd_reports(d, bracket_fields(d), opts.fd_tol_factor)) {
    // beta1, beta2 are caller-supplied; the bracket identities only diagnose them.
    r.informational = true;
    r.detail = "structure-equation diagnostic for the supplied beta1, beta2";
    d.diagnostics.push_back(std::move(r));
  }
  return d;
}

/// Chen's bound coefficient: n^2 (2n-3) / (2 (2n+3)) |H|^2 + (n+1)(n-2) c / 2.
inline double chen_rhs(int n, double c, double h2) {
  const double nn = n;
  return nn * nn * (2.0 * nn - 3.0) / (2.0 * (2.0 * nn + 3.0)) * h2 + 0.5 * (nn + 1.0) * (nn - 2.0) * c;
}

struct Delta2Result {
  std::vector<double> delta2;  // tau - inf K, per lattice node
  std::vector<double> tau;     // sum of frame-plane curvatures
  std::vector<double> inf_k;
  std::vector<double> angle;   // principal angle of the minimizing plane to span{E1, E2}
  int samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double radical_inverse(std::uint64_t k, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

inline double unit_double(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

}  // namespace detail

/// Unit normals of sampled planes: Halton(2,3) points with a seeded
/// Cranley-Patterson rotation, mapped uniformly onto S^2. The three frame
/// planes come first.
inline std::vector<Vec3> plane_normals(int samples, std::uint64_t seed) {
  std::vector<Vec3> out{{0.0, 0.0, 1.0}, {0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}};
  std::mt19937_64 gen(seed);
  const double o1 = detail::unit_double(gen);
  const double o2 = detail::unit_double(gen);
  for (int s = 0; s < samples; ++s) {
    double s1 = detail::radical_inverse(static_cast<std::uint64_t>(s) + 1, 2) + o1;
    double s2 = detail::radical_inverse(static_cast<std::uint64_t>(s) + 1, 3) + o2;
    s1 -= std::floor(s1);
    s2 -= std::floor(s2);
    const double z = 2.0 * s1 - 1.0;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * std::numbers::pi * s2;
    out.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return out;
}

/// Orthonormal basis of the plane with unit normal n.
inline std::pair<Vec3, Vec3> plane_basis(const Vec3& n) {
  int m = 0;
  for (int a = 1; a < 3; ++a)
    if (std::abs(n[a]) < std::abs(n[m])) m = a;
  Vec3 x{};
  x[m] = 1.0;
  const double p = x[0] * n[0] + x[1] * n[1] + x[2] * n[2];
  for (int a = 0; a < 3; ++a) x[a] -= p * n[a];
  const double xn = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  for (auto& c : x) c /= xn;
  const Vec3 y{n[1] * x[2] - n[2] * x[1], n[2] * x[0] - n[0] * x[2], n[0] * x[1] - n[1] * x[0]};
  return {x, y};
}

inline Delta2Result delta2(const M3Data& d, int plane_samples, std::uint64_t seed, int threads = thread_count()) {
  if (plane_samples < 1000) throw std::invalid_argument("delta2 needs at least 1000 plane samples");
  const auto normals = plane_normals(plane_samples, seed);
  std::vector<std::pair<Vec3, Vec3>> bases;
  bases.reserve(normals.size());
  for (const auto& n : normals) bases.push_back(plane_basis(n));
  Delta2Result out;
  out.samples = plane_samples;
  out.seed = seed;
  const std::size_t count = d.nodes.size();
  out.delta2.resize(count);
  out.tau.resize(count);
  out.inf_k.resize(count);
  out.angle.resize(count);
  parallel_for(
      count,
      [&](std::size_t id) {
        const auto& node = d.nodes[id];
        const Vec3 e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};
        const double tau = sectional_curvature(node, e1, e2) + sectional_curvature(node, e1, e3) +
                           sectional_curvature(node, e2, e3);
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t s = 0; s < bases.size(); ++s) {
          const double kk = sectional_curvature(node, bases[s].first, bases[s].second);
          if (kk < best) {
            best = kk;
            arg = s;
          }
        }
        out.tau[id] = tau;
        out.inf_k[id] = best;
        out.delta2[id] = tau - best;
        out.angle[id] = std::acos(std::min(1.0, std::abs(normals[arg][2])));
      },
      threads);
  return out;
}

// ---- JSON ---------------------------------------------------------------

inline Json taxis_to_json(const TAxis& t) { return Json{{"t0", t.t0}, {"t1", t.t1}, {"nt", t.nt}}; }

inline TAxis taxis_from_json(const Json& j) {
  TAxis t;
  t.t0 = j.at("t0").get<double>();
  t.t1 = j.at("t1").get<double>();
  t.nt = j.at("nt").get<int>();
  t.validate();
  return t;
}

inline Json m3_to_json(const M3Data& d) {
  Json j;
  j["regime"] = regime_name(d.regime);
  j["t_axis"] = taxis_to_json(d.taxis);
  j["F"] = field_to_json(d.F);
  j["C"] = d.C ? field_to_json(*d.C) : Json(nullptr);
  std::vector<double> a(d.nodes.size()), b(d.nodes.size()), g3(d.nodes.size()), c3(d.nodes.size()),
      lam(d.nodes.size()), al1(d.nodes.size()), al2(d.nodes.size()), frame;
  frame.reserve(9 * d.nodes.size());
  for (std::size_t n = 0; n < d.nodes.size(); ++n) {
    const auto& g = d.nodes[n];
    a[n] = g.g11_2;
    b[n] = g.g21_2;
    g3[n] = g.g11_3;
    c3[n] = g.g21_3;
    lam[n] = g.lambda;
    al1[n] = g.alpha1;
    al2[n] = g.alpha2;
    for (const auto& row : g.frame)
      for (double x : row) frame.push_back(x);
  }
  Json nodes;
  nodes["layout"] = "index = (k * ny + iy) * nx + ix; frame = 3x3 row-major, row i holds E_{i+1} in (d_u, d_v, d_t)";
  nodes["gamma11_2"] = a;
  nodes["gamma21_2"] = b;
  nodes["gamma11_3"] = g3;
  nodes["gamma21_3"] = c3;
  nodes["lambda"] = lam;
  nodes["alpha1"] = al1;
  nodes["alpha2"] = al2;
  nodes["frame"] = frame;
  if (d.regime == Regime::NonIntegrable) {
    nodes["beta1"] = d.beta1;
    nodes["beta2"] = d.beta2;
  }
  j["nodes"] = std::move(nodes);
  j["diagnostics"] = reports_to_json(d.diagnostics);
  return j;
}

}  // namespace ideal
