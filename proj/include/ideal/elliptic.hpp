#pragma once

// Damped Newton solver for the three scalar PDE families on rectangular
// grids with Dirichlet boundary data:
//
//   IdealF     Lap F = (3 - 6 e^{2F}) e^{-2F/3}
//   LinearC    Lap C = -2 C e^{-2F/3}          (F given)
//   Tzitzeica  Lap U = -2 e^{2U} + 2 q2 e^{-4U}
//
// An optional source term s turns each into Lap w = rhs(w) + s, which is how
// manufactured solutions are posed.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ideal/grid.hpp"

namespace ideal {

enum class PdeKind { IdealF, LinearC, Tzitzeica };

inline const char* pde_name(PdeKind k) {
  switch (k) {
    case PdeKind::IdealF: return "ideal-f";
    case PdeKind::LinearC: return "linear-c";
    default: return "tzitzeica";
  }
}

struct Pde {
  PdeKind kind = PdeKind::IdealF;
  std::optional<ScalarField2D> coupled_f;  // LinearC only
  double q2 = 0.0;                         // Tzitzeica only
  std::optional<ScalarField2D> source;

  static Pde ideal_f() { return {}; }
  static Pde linear_c(ScalarField2D f) {
    Pde p;
    p.kind = PdeKind::LinearC;
    p.coupled_f = std::move(f);
    return p;
  }
  static Pde tzitzeica(double q2) {
    if (!(q2 > 0.0)) throw std::invalid_argument("Tzitzeica equation requires q2 > 0");
    Pde p;
    p.kind = PdeKind::Tzitzeica;
    p.q2 = q2;
    return p;
  }
  Pde with_source(ScalarField2D s) const {
    Pde p = *this;
    p.source = std::move(s);
    return p;
  }

  void check_grid(const GridSpec& g) const {
    if (kind == PdeKind::LinearC && !coupled_f) throw GridError("linear-c needs a coupled F field");
    if (coupled_f && !(coupled_f->grid == g)) throw GridError("grid mismatch between field and coupled F");
    if (source && !(source->grid == g)) throw GridError("grid mismatch between field and source term");
  }

  /// Right-hand side at node n for value w, without the source term.
  double rhs(std::size_t n, double w) const {
    switch (kind) {
      case PdeKind::IdealF: return (3.0 - 6.0 * std::exp(2.0 * w)) * std::exp(-2.0 * w / 3.0);
      case PdeKind::LinearC: return -2.0 * w * std::exp(-2.0 * coupled_f->values[n] / 3.0);
      default: return -2.0 * std::exp(2.0 * w) + 2.0 * q2 * std::exp(-4.0 * w);
    }
  }
  double rhs_derivative(std::size_t n, double w) const {
    switch (kind) {
      case PdeKind::IdealF: return -2.0 * std::exp(-2.0 * w / 3.0) - 8.0 * std::exp(4.0 * w / 3.0);
      case PdeKind::LinearC: return -2.0 * std::exp(-2.0 * coupled_f->values[n] / 3.0);
      default: return -4.0 * std::exp(2.0 * w) - 8.0 * q2 * std::exp(-4.0 * w);
    }
  }
  double source_at(std::size_t n) const { return source ? source->values[n] : 0.0; }
};

/// Lap_h(field) - rhs(field) - source at interior nodes; zero on the boundary.
inline ScalarField2D residual(const Pde& pde, const ScalarField2D& field) {
  pde.check_grid(field.grid);
  const auto& g = field.grid;
  ScalarField2D r(g, "residual");
  for (int iy = 1; iy < g.ny - 1; ++iy)
    for (int ix = 1; ix < g.nx - 1; ++ix) {
      const std::size_t n = g.index(ix, iy);
      r(ix, iy) = laplacian5(field, ix, iy) - pde.rhs(n, field.values[n]) - pde.source_at(n);
    }
  return r;
}

enum class SolveStatus { Converged, NonConvergence, SingularJacobian };

inline const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::NonConvergence: return "non-convergence";
    default: return "singular-jacobian";
  }
}

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 50;
  int max_halvings = 30;
};

struct IterationRecord {
  int iteration = 0;
  double residual_max = 0.0;
  double residual_l2 = 0.0;
  double step_scale = 0.0;
};

struct SolveResult {
  ScalarField2D field;
  SolveStatus status = SolveStatus::NonConvergence;
  std::vector<IterationRecord> trace;

  bool converged() const { return status == SolveStatus::Converged; }
  double final_residual() const {
    return trace.empty() ? std::numeric_limits<double>::infinity() : trace.back().residual_max;
  }
};

/// Newton iteration over interior unknowns. Boundary values are copied from
/// `boundary`; interior values start from `initial`.
inline SolveResult solve(const Pde& pde, const ScalarField2D& boundary, const ScalarField2D& initial,
                         const SolveOptions& opts = {}) {
  boundary.validate();
  initial.validate();
  require_same_grid(boundary, initial);
  pde.check_grid(boundary.grid);
  if (!(opts.tol > 0.0)) throw std::invalid_argument("solve: tol must be positive");

  const GridSpec& g = boundary.grid;
  SolveResult out;
  out.field = initial;
  out.field.name = boundary.name.empty() ? pde_name(pde.kind) : boundary.name;
  ScalarField2D& w = out.field;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      if (!g.interior(ix, iy)) w(ix, iy) = boundary(ix, iy);

  const int mx = g.nx - 2;
  const int my = g.ny - 2;
  const int unknowns = mx * my;
  auto unknown = [mx](int ix, int iy) { return (iy - 1) * mx + (ix - 1); };
  const double cx = 1.0 / (g.hx * g.hx);
  const double cy = 1.0 / (g.hy * g.hy);

  auto norms = [](const ScalarField2D& r) { return std::pair{max_norm_interior(r), rms_interior(r)}; };

  ScalarField2D r = residual(pde, w);
  auto [rmax, rl2] = norms(r);
  out.trace.push_back({0, rmax, rl2, 0.0});

  for (int it = 1; it <= opts.max_iter && rmax > opts.tol; ++it) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(unknowns) * 5);
    Eigen::VectorXd rhs(unknowns);
    for (int iy = 1; iy < g.ny - 1; ++iy)
      for (int ix = 1; ix < g.nx - 1; ++ix) {
        const int row = unknown(ix, iy);
        const std::size_t n = g.index(ix, iy);
        triplets.emplace_back(row, row, -2.0 * cx - 2.0 * cy - pde.rhs_derivative(n, w.values[n]));
        if (ix > 1) triplets.emplace_back(row, unknown(ix - 1, iy), cx);
        if (ix < g.nx - 2) triplets.emplace_back(row, unknown(ix + 1, iy), cx);
        if (iy > 1) triplets.emplace_back(row, unknown(ix, iy - 1), cy);
        if (iy < g.ny - 2) triplets.emplace_back(row, unknown(ix, iy + 1), cy);
        rhs[row] = -r(ix, iy);
      }
    Eigen::SparseMatrix<double> jac(unknowns, unknowns);
    jac.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success) {
      out.status = SolveStatus::SingularJacobian;
      return out;
    }
    const Eigen::VectorXd delta = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !delta.allFinite()) {
      out.status = SolveStatus::SingularJacobian;
      return out;
    }

    double scale = 1.0;
    ScalarField2D trial = w;
    ScalarField2D trial_r;
    double tmax = 0.0, tl2 = 0.0;
    for (int halving = 0;; ++halving) {
      for (int iy = 1; iy < g.ny - 1; ++iy)
        for (int ix = 1; ix < g.nx - 1; ++ix) trial(ix, iy) = w(ix, iy) + scale * delta[unknown(ix, iy)];
      trial_r = residual(pde, trial);
      std::tie(tmax, tl2) = norms(trial_r);
      if ((std::isfinite(tl2) && tl2 < rl2) || halving >= opts.max_halvings) break;
      scale *= 0.5;
    }
    if (!std::isfinite(tl2) || !(tl2 < rl2)) {
      // Line search failed: keep the best iterate.
      out.trace.push_back({it, rmax, rl2, 0.0});
      out.status = SolveStatus::NonConvergence;
      return out;
    }
    w = std::move(trial);
    r = std::move(trial_r);
    rmax = tmax;
    rl2 = tl2;
    out.trace.push_back({it, rmax, rl2, scale});
  }
  out.status = rmax <= opts.tol ? SolveStatus::Converged : SolveStatus::NonConvergence;
  return out;
}

/// (1/phi) Lap_h f - rhs at interior nodes, for isothermal metrics phi (du^2 + dv^2).
inline ScalarField2D laplace_beltrami_residual(const ScalarField2D& f, const ScalarField2D& phi,
                                               const ScalarField2D& rhs) {
  require_same_grid(f, phi);
  require_same_grid(f, rhs);
  for (double p : phi.values)
    if (!(p > 0.0)) throw std::invalid_argument("laplace_beltrami_residual: conformal factor must be positive");
  const auto& g = f.grid;
  ScalarField2D r(g, "laplace_beltrami_residual");
  for (int iy = 1; iy < g.ny - 1; ++iy)
    for (int ix = 1; ix < g.nx - 1; ++ix) r(ix, iy) = laplacian5(f, ix, iy) / phi(ix, iy) - rhs(ix, iy);
  return r;
}

/// Constant solution of IdealF: e^{2F} = 1/2.
inline double ideal_f_constant() { return -0.5 * std::log(2.0); }

/// Plane-wave solution F(u cos theta + v sin theta) of IdealF: the profile
/// solves F'' = (3 - 6 e^{2F}) e^{-2F/3}, F(0) = f0, F'(0) = df0, and is
/// periodic around the constant solution. Used as boundary data that is
/// compatible with the equation (no corner layer).
struct PlaneWave {
  double theta = 0.4, f0 = ideal_f_constant() + 0.3, df0 = 0.0;
  double max_step = 1e-3;  // RK4 step bound for the profile

  double profile(double s) const {
    if (!(max_step > 0.0)) throw std::invalid_argument("PlaneWave: max_step must be positive");
    auto acc = [](double f) { return (3.0 - 6.0 * std::exp(2.0 * f)) * std::exp(-2.0 * f / 3.0); };
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(s) / max_step)));
    const double h = s / n;
    double f = f0, p = df0;
    for (int i = 0; i < n; ++i) {
      const double k1f = p, k1p = acc(f);
      const double k2f = p + 0.5 * h * k1p, k2p = acc(f + 0.5 * h * k1f);
      const double k3f = p + 0.5 * h * k2p, k3p = acc(f + 0.5 * h * k2f);
      const double k4f = p + h * k3p, k4p = acc(f + h * k3f);
      f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
      p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    return f;
  }
  double operator()(double u, double v) const { return profile(u * std::cos(theta) + v * std::sin(theta)); }
};

}  // namespace ideal
