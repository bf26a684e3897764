#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ideal/elliptic.hpp"
#include "ideal/json_io.hpp"

using namespace ideal;

namespace {

GridSpec square(int cells, double side) {
  GridSpec g;
  g.nx = g.ny = cells + 1;
  g.hx = g.hy = side / cells;
  return g;
}

double mms_exact(double u, double v) { return 0.1 * std::sin(u) * std::sin(v); }

// Continuous Laplacian of the manufactured solution minus the IdealF right-hand side.
double mms_source(double u, double v) {
  const double f = mms_exact(u, v);
  return -2.0 * f - (3.0 - 6.0 * std::exp(2.0 * f)) * std::exp(-2.0 * f / 3.0);
}

double mms_error(int cells) {
  const GridSpec g = square(cells, std::numbers::pi);
  const auto exact = ScalarField2D::from_function(g, "F", mms_exact);
  const auto src = ScalarField2D::from_function(g, "s", mms_source);
  const auto res = solve(Pde::ideal_f().with_source(src), exact, ScalarField2D(g, "init"));
  EXPECT_TRUE(res.converged()) << status_name(res.status);
  double e = 0.0;
  for (std::size_t n = 0; n < exact.values.size(); ++n) e = std::max(e, std::abs(res.field.values[n] - exact.values[n]));
  return e;
}

}  // namespace

TEST(Residual, ConstantIdealFIsExact) {
  const auto f = ScalarField2D(square(8, 1.0), "F", ideal_f_constant());
  EXPECT_LE(max_norm_interior(residual(Pde::ideal_f(), f)), 1e-14);
}

TEST(Residual, ZeroSolvesLinearC) {
  const GridSpec g = square(8, 1.0);
  const auto f = ScalarField2D::from_function(g, "F", [](double u, double v) { return u * v; });
  EXPECT_EQ(max_norm_interior(residual(Pde::linear_c(f), ScalarField2D(g, "C"))), 0.0);
}

TEST(Residual, TzitzeicaConstant) {
  const auto u = ScalarField2D(square(8, 1.0), "U", std::log(4.0) / 6.0);
  EXPECT_LE(max_norm_interior(residual(Pde::tzitzeica(4.0), u)), 1e-14);
  EXPECT_THROW(Pde::tzitzeica(0.0), std::invalid_argument);
}

TEST(Residual, GridMismatchThrows) {
  const auto f = ScalarField2D(square(8, 1.0), "F");
  const auto c = ScalarField2D(square(9, 1.0), "C");
  EXPECT_THROW(residual(Pde::linear_c(f), c), GridError);
}

TEST(Residual, BoundaryIsZero) {
  const GridSpec g = square(6, 1.0);
  const auto f = ScalarField2D::from_function(g, "F", [](double u, double v) { return u * u + v; });
  const auto r = residual(Pde::ideal_f(), f);
  for (int i = 0; i < g.nx; ++i) {
    EXPECT_EQ(r(i, 0), 0.0);
    EXPECT_EQ(r(i, g.ny - 1), 0.0);
  }
}

TEST(Residual, LinearCIsLinear) {
  const GridSpec g = square(10, 1.0);
  const auto f = ScalarField2D::from_function(g, "F", [](double u, double v) { return 0.3 * u - 0.2 * v; });
  const auto c1 = ScalarField2D::from_function(g, "C1", [](double u, double v) { return std::sin(3 * u) * v; });
  const auto c2 = ScalarField2D::from_function(g, "C2", [](double u, double v) { return std::exp(u - v); });
  ScalarField2D mix(g, "mix");
  for (std::size_t n = 0; n < mix.values.size(); ++n) mix.values[n] = 2.0 * c1.values[n] - 0.5 * c2.values[n];
  const auto pde = Pde::linear_c(f);
  const auto r1 = residual(pde, c1), r2 = residual(pde, c2), rm = residual(pde, mix);
  for (std::size_t n = 0; n < mix.values.size(); ++n)
    EXPECT_NEAR(rm.values[n], 2.0 * r1.values[n] - 0.5 * r2.values[n], 1e-12);
}

TEST(Solve, ConstantSolutionFromZeroGuess) {
  const GridSpec g = square(16, 1.0);
  const auto res = solve(Pde::ideal_f(), ScalarField2D(g, "F", ideal_f_constant()), ScalarField2D(g, "init"));
  ASSERT_TRUE(res.converged());
  for (double x : res.field.values) EXPECT_NEAR(x, ideal_f_constant(), 1e-12);
  EXPECT_LE(max_norm_interior(residual(Pde::ideal_f(), res.field)), 1e-10);
}

TEST(Solve, TzitzeicaConstant) {
  const GridSpec g = square(12, 1.0);
  const double u0 = std::log(0.25) / 6.0;
  const auto res = solve(Pde::tzitzeica(0.25), ScalarField2D(g, "U", u0), ScalarField2D(g, "init"));
  ASSERT_TRUE(res.converged());
  for (double x : res.field.values) EXPECT_NEAR(x, u0, 1e-12);
}

TEST(Solve, ManufacturedSolutionIsSecondOrder) {
  const double e32 = mms_error(32), e64 = mms_error(64), e128 = mms_error(128);
  EXPECT_GE(e32 / e64, 3.5);
  EXPECT_LE(e32 / e64, 4.5);
  EXPECT_GE(e64 / e128, 3.5);
  EXPECT_LE(e64 / e128, 4.5);
}

TEST(Solve, NewtonConvergesQuadratically) {
  const GridSpec g = square(32, std::numbers::pi);
  const auto exact = ScalarField2D::from_function(g, "F", mms_exact);
  const auto src = ScalarField2D::from_function(g, "s", mms_source);
  const auto res = solve(Pde::ideal_f().with_source(src), exact, ScalarField2D(g, "init"));
  ASSERT_TRUE(res.converged());
  for (std::size_t n = 1; n < res.trace.size(); ++n) {
    const double prev = res.trace[n - 1].residual_max;
    if (prev < 1e-3 && prev > 1e-12) {
      EXPECT_LE(res.trace[n].residual_max, 100.0 * prev * prev);
    }
  }
}

TEST(Solve, NonConvergenceReturnsBestIterate) {
  const GridSpec g = square(16, 1.0);
  SolveOptions o;
  o.max_iter = 1;
  const auto bc = ScalarField2D::from_function(g, "F", [](double u, double v) { return -0.35 + 0.3 * u + 0.2 * v; });
  const auto res = solve(Pde::ideal_f(), bc, ScalarField2D(g, "init"), o);
  EXPECT_EQ(res.status, SolveStatus::NonConvergence);
  EXPECT_EQ(res.trace.size(), 2u);
  EXPECT_LT(res.trace[1].residual_max, res.trace[0].residual_max);
  EXPECT_EQ(res.field(0, 5), bc(0, 5));
}

TEST(Solve, RejectsNonPositiveTolerance) {
  const GridSpec g = square(4, 1.0);
  SolveOptions o;
  o.tol = 0.0;
  EXPECT_THROW(solve(Pde::ideal_f(), ScalarField2D(g, "b"), ScalarField2D(g, "i"), o), std::invalid_argument);
}

TEST(LaplaceBeltrami, HarmonicBilinear) {
  const GridSpec g = square(10, 2.0);
  const auto f = ScalarField2D::from_function(g, "f", [](double u, double v) { return u * v; });
  const auto r = laplace_beltrami_residual(f, ScalarField2D(g, "phi", 1.0), ScalarField2D(g, "rhs"));
  EXPECT_LE(max_norm_interior(r), 1e-12);
}

TEST(LaplaceBeltrami, RejectsNonPositivePhi) {
  const GridSpec g = square(4, 1.0);
  EXPECT_THROW(laplace_beltrami_residual(ScalarField2D(g, "f"), ScalarField2D(g, "phi"), ScalarField2D(g, "r")),
               std::invalid_argument);
}

TEST(LaplaceBeltrami, IdealFInIsothermalForm) {
  // f solves IdealF  <=>  (1/phi) Lap f = 6 (1 - 2 e^{2f}) with phi = e^{-2f/3} / 2.
  for (int cells : {16, 32}) {
    const GridSpec g = square(cells, 1.0);
    const auto bc = ScalarField2D::from_function(g, "F", [](double u, double v) { return -0.35 + 0.3 * u + 0.2 * v; });
    const auto f = solve(Pde::ideal_f(), bc, bc).field;
    const auto phi = f.map("phi", [](double x) { return 0.5 * std::exp(-2.0 * x / 3.0); });
    const auto rhs = f.map("rhs", [](double x) { return 6.0 * (1.0 - 2.0 * std::exp(2.0 * x)); });
    EXPECT_LE(max_norm_interior(laplace_beltrami_residual(f, phi, rhs)), 1e-8);
  }
}

TEST(LaplaceBeltrami, LinearCIsEigenfunction) {
  const GridSpec g = square(24, 1.0);
  const auto bcf = ScalarField2D::from_function(g, "F", [](double u, double v) { return -0.35 + 0.3 * u + 0.2 * v; });
  const auto f = solve(Pde::ideal_f(), bcf, bcf).field;
  const auto bcc = ScalarField2D::from_function(g, "C", [](double u, double v) { return 0.2 + 0.1 * u - 0.05 * v; });
  const auto c = solve(Pde::linear_c(f), bcc, bcc).field;
  const auto phi = f.map("phi", [](double x) { return 0.5 * std::exp(-2.0 * x / 3.0); });
  const auto rhs = c.map("rhs", [](double x) { return -4.0 * x; });
  EXPECT_LE(max_norm_interior(laplace_beltrami_residual(c, phi, rhs)), 1e-8);
}

TEST(FieldIo, RoundTripIsExact) {
  GridSpec g = square(5, 1.0);
  g.u0 = 0.25;
  const auto f = ScalarField2D::from_function(g, "F", [](double u, double v) { return std::sin(u) / 3.0 + v; });
  const auto back = field_from_json(Json::parse(render_json(field_to_json(f))));
  EXPECT_EQ(back.grid, f.grid);
  EXPECT_EQ(back.values, f.values);
  EXPECT_EQ(back.name, "F");
}

TEST(FieldIo, RejectsWrongValueCount) {
  Json j = field_to_json(ScalarField2D(square(4, 1.0), "F"));
  j["values"].erase(0);
  EXPECT_THROW(field_from_json(j), IoError);
}
