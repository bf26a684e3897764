#pragma once

// Shared test data: converged IdealF / LinearC fields on the unit square.

#include <cmath>
#include <stdexcept>

#include "ideal/elliptic.hpp"
#include "ideal/m3.hpp"

namespace fixtures {

inline ideal::GridSpec unit_square(int nodes) {
  ideal::GridSpec g;
  g.nx = g.ny = nodes;
  g.hx = g.hy = 1.0 / (nodes - 1);
  return g;
}

inline double affine_boundary(double u, double v) { return ideal::ideal_f_constant() + 0.3 * u + 0.2 * v; }

inline ideal::ScalarField2D solved_f(int nodes) {
  const auto g = unit_square(nodes);
  const auto bc = ideal::ScalarField2D::from_function(g, "F", affine_boundary);
  auto res = ideal::solve(ideal::Pde::ideal_f(), bc, bc);
  if (!res.converged()) throw std::runtime_error("fixture: IdealF solve did not converge");
  return res.field;
}

/// IdealF solved with plane-wave boundary data: smooth up to the corners.
inline ideal::ScalarField2D wave_f(int nodes) {
  const auto g = unit_square(nodes);
  const auto bc = ideal::ScalarField2D::from_function(g, "F", ideal::PlaneWave{});
  auto res = ideal::solve(ideal::Pde::ideal_f(), bc, bc);
  if (!res.converged()) throw std::runtime_error("fixture: IdealF solve did not converge");
  return res.field;
}

inline ideal::ScalarField2D constant_f(int nodes) {
  return ideal::ScalarField2D(unit_square(nodes), "F", ideal::ideal_f_constant());
}

inline ideal::ScalarField2D solved_c(const ideal::ScalarField2D& f, double scale = 1.0) {
  const auto bc = ideal::ScalarField2D::from_function(
      f.grid, "C", [scale](double u, double v) { return scale * (0.4 + 0.2 * u - 0.1 * v); });
  auto res = ideal::solve(ideal::Pde::linear_c(f), bc, bc);
  if (!res.converged()) throw std::runtime_error("fixture: LinearC solve did not converge");
  return res.field;
}

/// t-axis on [0.5, 2] refined alongside a grid with `nodes` points per side.
inline ideal::TAxis taxis_for(int nodes) {
  ideal::TAxis t;
  t.nt = (nodes - 1) / 4 + 1;
  return t;
}

}  // namespace fixtures
