#pragma once

// Minimal anti-symmetric totally complex surfaces N^2 in HP^2 from one
// scalar f: beta = sqrt2 e^f, isothermal coordinates with
// g = (2 beta)^{-2/3} (du^2 + dv^2), frame E_i = rho^{-1} d_i, rho = (2 beta)^{-1/3}.
//
// The ambient 8-frame {E1, E2, JE1, KE1, xi, I xi, J xi, K xi} is abstract:
// structures and curvature act on coefficient vectors in that basis.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "ideal/elliptic.hpp"
#include "ideal/grid.hpp"
#include "ideal/json_io.hpp"
#include "ideal/report.hpp"

namespace ideal {

struct N2Node {
  double beta = 1.0, rho = 1.0, phi = 1.0;
  double a = 0.0, b = 0.0;
  // ambient connection coefficients in the gauge c3 = 0, alpha = beta
  double p1 = 0.0, p2 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
  double alpha = 1.0;
};

struct N2Data {
  ScalarField2D f;
  ScalarField2D beta, rho, phi, a, b;
  std::vector<N2Node> nodes;  // grid index order

  const N2Node& at(int ix, int iy) const { return nodes[f.grid.index(ix, iy)]; }
};

inline N2Data build_n2(const ScalarField2D& f) {
  f.validate();
  N2Data d;
  d.f = f;
  const auto& g = f.grid;
  d.beta = f.map("beta", [](double x) { return std::numbers::sqrt2 * std::exp(x); });
  d.rho = d.beta.map("rho", [](double bt) { return std::cbrt(1.0 / (2.0 * bt)); });
  d.phi = d.rho.map("phi", [](double r) { return r * r; });
  d.a = ScalarField2D(g, "a");
  d.b = ScalarField2D(g, "b");
  d.nodes.resize(g.size());
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const std::size_t n = g.index(ix, iy);
      N2Node& m = d.nodes[n];
      m.beta = d.beta.values[n];
      m.rho = d.rho.values[n];
      m.phi = d.phi.values[n];
      // E2(beta) = 3 a beta, E1(beta) = 3 b beta with E_i = rho^{-1} d_i
      m.a = d_v(d.beta, ix, iy) / (3.0 * m.beta * m.rho);
      m.b = d_u(d.beta, ix, iy) / (3.0 * m.beta * m.rho);
      d.a.values[n] = m.a;
      d.b.values[n] = m.b;
      m.alpha = m.beta;
      m.p1 = 2.0 * m.a;
      m.p2 = -2.0 * m.b;
      m.c1 = 2.0 * m.a;
      m.c2 = 2.0 * m.beta;
      m.c3 = 0.0;
      m.d1 = -2.0 * m.b;
      m.d2 = -m.c3;
      m.d3 = m.c2 - 2.0 * m.beta;
    }
  return d;
}

// ---- structure equations ---------------------------------------------------

/// a, b carry one-sided differences on the boundary, so anything that
/// differentiates them again is only second order from this many nodes in.
inline constexpr int kComposedMargin = 2;

/// Residual fields of the structure equations (0 where undefined).
/// Derivatives are central differences of the stored fields; diffa1b2,
/// diffa2b1 start kComposedMargin nodes in, the others one node in.
struct N2Residuals {
  ScalarField2D diffbeta1, diffbeta2, diffa1b2, diffa2b1, logbeta;
};

inline N2Residuals structure_residuals(const N2Data& d) {
  const auto& g = d.f.grid;
  N2Residuals r{ScalarField2D(g, "diffbeta1"), ScalarField2D(g, "diffbeta2"), ScalarField2D(g, "diffa1b2"),
                ScalarField2D(g, "diffa2b1"), ScalarField2D(g, "logbeta")};
  const ScalarField2D logb = d.beta.map("log_beta", [](double x) { return std::log(x); });
  for (int iy = 1; iy < g.ny - 1; ++iy)
    for (int ix = 1; ix < g.nx - 1; ++ix) {
      const N2Node& m = d.at(ix, iy);
      const double inv = 1.0 / m.rho;
      // E1(beta) - 3 b beta with b from f-derivatives, E1(beta) from beta
      const double fu = d_u(d.f, ix, iy), fv = d_v(d.f, ix, iy);
      r.diffbeta1(ix, iy) = inv * d_u(d.beta, ix, iy) - 3.0 * (inv * fu / 3.0) * m.beta;
      r.diffbeta2(ix, iy) = inv * d_v(d.beta, ix, iy) - 3.0 * (inv * fv / 3.0) * m.beta;
      r.logbeta(ix, iy) =
          laplacian5(logb, ix, iy) + 3.0 * std::cbrt(2.0) * (m.beta * m.beta - 1.0) / std::cbrt(m.beta * m.beta);
    }
  const int c = kComposedMargin;
  for (int iy = c; iy < g.ny - c; ++iy)
    for (int ix = c; ix < g.nx - c; ++ix) {
      const N2Node& m = d.at(ix, iy);
      const double inv = 1.0 / m.rho;
      r.diffa1b2(ix, iy) = inv * (d_u(d.a, ix, iy) - d_v(d.b, ix, iy));
      r.diffa2b1(ix, iy) =
          inv * (d_v(d.a, ix, iy) + d_u(d.b, ix, iy)) - (2.0 + m.a * m.a + m.b * m.b - 2.0 * m.beta * m.beta);
    }
  return r;
}

inline ScalarField2D logbeta_residual(const N2Data& d) { return structure_residuals(d).logbeta; }

/// Largest |value| over interior nodes that are multiples of `stride`,
/// at least `margin` nodes from the edge.
inline double interior_max(const ScalarField2D& f, int stride = 1, int margin = 1) {
  double m = 0.0;
  const int lo = std::max(margin, 1);
  for (int iy = lo; iy < f.grid.ny - lo; ++iy)
    for (int ix = lo; ix < f.grid.nx - lo; ++ix)
      if (ix % stride == 0 && iy % stride == 0) m = std::max(m, std::abs(f(ix, iy)));
  return m;
}

// ---- abstract ambient frame -----------------------------------------------

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

/// Basis order of the abstract tangent space of HP^2 along N^2.
enum N2Basis { kE1 = 0, kE2, kJE1, kKE1, kXi, kIXi, kJXi, kKXi };

/// I, J, K on the abstract basis; E2 = I E1 and the xi block mirrors the E1 block.
inline std::array<Mat8, 3> n2_structures() {
  Mat8 I = Mat8::Zero(), J = Mat8::Zero();
  // columns are images of basis vectors
  auto set = [](Mat8& m, int from, int to, double s) { m(to, from) = s; };
  for (int o : {0, 4}) {
    // block (X, IX, JX, KX) for X = E1 (o = 0, IX = E2) and X = xi (o = 4)
    const int x = o, ix = o + 1, jx = o + 2, kx = o + 3;
    set(I, x, ix, 1);
    set(I, ix, x, -1);
    set(I, jx, kx, 1);
    set(I, kx, jx, -1);
    set(J, x, jx, 1);
    set(J, jx, x, -1);
    set(J, ix, kx, -1);  // J I X = -K X
    set(J, kx, ix, 1);   // J K X = I X
  }
  const Mat8 K = I * J;
  return {I, J, K};
}

/// Curvature of HP^2 (Q-sectional curvature 4) on the abstract frame.
inline Vec8 n2_curvature(const Vec8& x, const Vec8& y, const Vec8& z) {
  static const auto S = n2_structures();
  Vec8 r = y.dot(z) * x - x.dot(z) * y;
  for (const auto& s : S) {
    const Vec8 sx = s * x, sy = s * y, sz = s * z;
    r += sy.dot(z) * sx - sx.dot(z) * sy - 2.0 * sx.dot(y) * sz;
  }
  return r;
}

/// Model second fundamental form h(E_i, E_j), i, j in {0, 1}.
inline Vec8 n2_second_fundamental(double beta, int i, int j) {
  Vec8 v = Vec8::Zero();
  if (i == 0 && j == 0) {
    v(kXi) = 1.0;
    v(kJE1) = beta;
  } else if (i == 1 && j == 1) {
    v(kXi) = -1.0;
    v(kJE1) = -beta;
  } else {
    v(kIXi) = 1.0;
    v(kKE1) = -beta;
  }
  return v;
}

/// Identities of the model that hold exactly: Gauss-formula one-forms
/// r(E1) = 0, r(E2) = -2 beta, q(E1) = 2 beta, q(E2) = 0 from
/// h(X, IY) - I h(X, Y) = r(X) JY - q(X) KY; complex-linearity of
/// C = g(h, J .) + i g(h, K .). Returns the largest defect.
inline double n2_model_identity_defect(double beta) {
  static const auto S = n2_structures();
  const Mat8 &I = S[0], &J = S[1], &K = S[2];
  const Vec8 e[2] = {Vec8::Unit(kE1), Vec8::Unit(kE2)};
  auto h = [&](const Vec8& x, const Vec8& y) {
    Vec8 out = Vec8::Zero();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) out += x(i) * y(j) * n2_second_fundamental(beta, i, j);
    return out;
  };
  const double r[2] = {0.0, -2.0 * beta}, q[2] = {2.0 * beta, 0.0};
  double m = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      // h(X, IY) - I h(X, Y); IY stays tangent
      const Vec8 lhs = h(e[x], I * e[y]) - I * h(e[x], e[y]);
      m = std::max(m, (lhs - (r[x] * (J * e[y]) - q[x] * (K * e[y]))).cwiseAbs().maxCoeff());
    }
  auto C = [&](const Vec8& x, const Vec8& y, const Vec8& z) {
    const Vec8 hv = h(x, y);
    return std::complex<double>(hv.dot(J * z), hv.dot(K * z));
  };
  const std::complex<double> i1(0.0, 1.0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) {
        m = std::max(m, std::abs(C(e[x], e[y], I * e[z]) - i1 * C(e[x], e[y], e[z])));
        m = std::max(m, std::abs(C(e[x], I * e[y], e[z]) + i1 * C(e[x], e[y], e[z])));
      }
  return m;
}

/// g(h(X,Y), J Z) + g(h(X,Z), J Y) for the model, largest over the frame;
/// equals 2 beta (at X = Y = Z = E1), so the literal reading never vanishes.
inline double n2_literal_antisymmetry(double beta) {
  static const auto S = n2_structures();
  double m = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z)
        for (int s : {1, 2}) {
          const double t = n2_second_fundamental(beta, x, y).dot(S[s] * Vec8::Unit(z)) +
                           n2_second_fundamental(beta, x, z).dot(S[s] * Vec8::Unit(y));
          m = std::max(m, std::abs(t));
        }
  return m;
}

/// Gauss equation on N^2 for (X, Y, Z) = (E1, E2, E1) and (E1, E2, E2):
/// (R~(X,Y)Z)^T - R(X,Y)Z - A_{h(X,Z)} Y + A_{h(Y,Z)} X, with intrinsic
/// curvature K = E1(b) + E2(a) - a^2 - b^2 from central differences.
inline ScalarField2D gauss_crosscheck_field(const N2Data& d) {
  const auto& g = d.f.grid;
  ScalarField2D out(g, "gauss_crosscheck");
  const int c = kComposedMargin;
  for (int iy = c; iy < g.ny - c; ++iy)
    for (int ix = c; ix < g.nx - c; ++ix) {
      const N2Node& m = d.at(ix, iy);
      const double inv = 1.0 / m.rho;
      const double K = inv * (d_u(d.b, ix, iy) + d_v(d.a, ix, iy)) - m.a * m.a - m.b * m.b;
      const Vec8 e[2] = {Vec8::Unit(kE1), Vec8::Unit(kE2)};
      auto shape = [&](const Vec8& nrm, int x) {  // A_nrm E_x, tangent
        Vec8 v = Vec8::Zero();
        for (int y = 0; y < 2; ++y) v(y) = n2_second_fundamental(m.beta, x, y).dot(nrm);
        return v;
      };
      double r = 0.0;
      for (int z = 0; z < 2; ++z) {
        Vec8 amb = n2_curvature(e[0], e[1], e[z]);
        amb.tail<6>().setZero();
        // R(E1,E2)E1 = -K E2, R(E1,E2)E2 = K E1
        const Vec8 intr = z == 0 ? Vec8(-K * e[1]) : Vec8(K * e[0]);
        const Vec8 rhs = intr + shape(n2_second_fundamental(m.beta, 0, z), 1) -
                         shape(n2_second_fundamental(m.beta, 1, z), 0);
        r = std::max(r, (amb - rhs).cwiseAbs().maxCoeff());
      }
      out(ix, iy) = r;
    }
  return out;
}

// ---- reports ---------------------------------------------------------------

struct N2CheckOptions {
  double fd_tol_factor = 10.0;
  double model_tolerance = 1e-12;
};

inline std::vector<ResidualReport> verify_n2(const N2Data& d, const N2CheckOptions& c = {}) {
  const double h = d.f.grid.h(), tol = c.fd_tol_factor * h * h;
  const auto& g = d.f.grid;
  auto interior = [&](const ScalarField2D& f, int margin) {
    std::vector<double> v;
    for (int iy = margin; iy < g.ny - margin; ++iy)
      for (int ix = margin; ix < g.nx - margin; ++ix) v.push_back(f(ix, iy));
    return v;
  };
  if (g.nx < 2 * kComposedMargin + 1 || g.ny < 2 * kComposedMargin + 1)
    throw std::invalid_argument("verify_n2: grid needs at least 5 nodes per side");
  const N2Residuals r = structure_residuals(d);
  const int c2 = kComposedMargin;
  std::vector<ResidualReport> out;
  for (const auto* f : {&r.diffbeta1, &r.diffbeta2}) out.push_back(ResidualReport::from_samples(f->name, interior(*f, 1), h, tol));
  for (const auto* f : {&r.diffa1b2, &r.diffa2b1}) out.push_back(ResidualReport::from_samples(f->name, interior(*f, c2), h, tol));
  out.push_back(ResidualReport::from_samples(r.logbeta.name, interior(r.logbeta, 1), h, tol));
  out.push_back(ResidualReport::from_samples("gauss_crosscheck", interior(gauss_crosscheck_field(d), c2), h, tol));
  std::vector<double> model, literal, gauge;
  for (const auto& m : d.nodes) {
    model.push_back(n2_model_identity_defect(m.beta));
    literal.push_back(n2_literal_antisymmetry(m.beta));
    gauge.push_back(std::max({std::abs(m.c3), std::abs(m.d2 + m.c3), std::abs(m.d3 - m.c2 + 2.0 * m.beta),
                              std::abs(m.c1 - 2.0 * m.a), std::abs(m.d1 + 2.0 * m.b), std::abs(m.alpha - m.beta)}));
  }
  out.push_back(ResidualReport::from_samples("model_identities", model, h, c.model_tolerance));
  out.push_back(ResidualReport::from_samples("codazzi_ricci_algebraic", gauge, h, c.model_tolerance));
  out.push_back(ResidualReport::info("anti_symmetry_literal", literal, h,
                                     "g(h(X,Y),JZ) + g(h(X,Z),JY) for the model form; equals 2 beta"));
  return out;
}

/// Growth of the diffa2b1 residual when f is replaced by f + eps sin(u):
/// max |res(f + eps sin u) - res(f)|, one entry per eps. The difference
/// removes the discretisation error of f itself, leaving the Theta(eps)
/// defect of a field that no longer solves IdealF.
inline std::vector<double> perturbation_growth(const ScalarField2D& f, const std::vector<double>& eps) {
  const ScalarField2D base = structure_residuals(build_n2(f)).diffa2b1;
  std::vector<double> out;
  for (double e : eps) {
    ScalarField2D p = f;
    for (int iy = 0; iy < f.grid.ny; ++iy)
      for (int ix = 0; ix < f.grid.nx; ++ix) p(ix, iy) += e * std::sin(f.grid.u(ix));
    ScalarField2D r = structure_residuals(build_n2(p)).diffa2b1;
    for (std::size_t n = 0; n < r.values.size(); ++n) r.values[n] -= base.values[n];
    out.push_back(interior_max(r, 1, kComposedMargin));
  }
  return out;
}

inline Json n2_to_json(const N2Data& d) {
  Json j;
  j["f"] = field_to_json(d.f);
  j["beta"] = field_to_json(d.beta);
  j["rho"] = field_to_json(d.rho);
  j["phi"] = field_to_json(d.phi);
  j["a"] = field_to_json(d.a);
  j["b"] = field_to_json(d.b);
  j["gauge"] = Json{{"c3", 0.0}, {"alpha", "beta"}, {"relations", "p1 = c1 = 2a, p2 = d1 = -2b, c2 = 2 beta, d2 = d3 = 0"}};
  return j;
}

}  // namespace ideal
