#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "ideal/hp2_surface.hpp"

using namespace ideal;

TEST(N2Build, ConstantSolution) {
  const N2Data d = build_n2(fixtures::constant_f(9));
  for (const auto& m : d.nodes) {
    EXPECT_NEAR(m.beta, 1.0, 1e-15);
    EXPECT_NEAR(m.a, 0.0, 1e-15);
    EXPECT_NEAR(m.b, 0.0, 1e-15);
    EXPECT_NEAR(m.phi, std::pow(2.0, -2.0 / 3.0), 1e-15);
  }
  const auto r = structure_residuals(d);
  EXPECT_LE(interior_max(r.logbeta), 1e-14);
  EXPECT_LE(interior_max(r.diffa2b1), 1e-14);  // 2 - 2 beta^2 = 0
  EXPECT_LE(interior_max(gauss_crosscheck_field(d)), 1e-14);
}

TEST(N2Build, ConformalFactorMatchesHalfExp) {
  const auto f = fixtures::solved_f(9);
  const N2Data d = build_n2(f);
  for (std::size_t n = 0; n < d.nodes.size(); ++n) {
    EXPECT_GT(d.nodes[n].beta, 0.0);
    EXPECT_NEAR(d.nodes[n].phi, 0.5 * std::exp(-2.0 * f.values[n] / 3.0), 1e-14);
    EXPECT_EQ(d.nodes[n].c3, 0.0);
    EXPECT_EQ(d.nodes[n].alpha, d.nodes[n].beta);
  }
}

TEST(N2Model, StructuresAreQuaternionic) {
  const auto S = n2_structures();
  const Mat8 id = Mat8::Identity();
  for (const auto& s : S) {
    EXPECT_LE((s * s + id).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((s.transpose() * s - id).cwiseAbs().maxCoeff(), 1e-15);
  }
  EXPECT_LE((S[0] * S[1] + S[1] * S[0]).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((S[0] * S[1] - S[2]).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(N2Model, CurvatureConstants) {
  // totally complex plane {E1, I E1}: 4; E1 against xi: 1
  const Vec8 e1 = Vec8::Unit(kE1), e2 = Vec8::Unit(kE2), xi = Vec8::Unit(kXi);
  EXPECT_NEAR(n2_curvature(e1, e2, e2).dot(e1), 4.0, 1e-15);
  EXPECT_NEAR(n2_curvature(e1, xi, xi).dot(e1), 1.0, 1e-15);
}

TEST(N2Model, IdentitiesAndLiteralReading) {
  for (double beta : {0.3, 1.0, 2.5}) {
    EXPECT_LE(n2_model_identity_defect(beta), 1e-15);
    EXPECT_NEAR(n2_literal_antisymmetry(beta), 2.0 * beta, 1e-15);
  }
}

TEST(N2Residuals, LogBetaEqualsIdealFResidual) {
  const auto f = fixtures::solved_f(17);
  const auto r = structure_residuals(build_n2(f));
  const auto ref = residual(Pde::ideal_f(), f);
  for (int iy = 1; iy < 16; ++iy)
    for (int ix = 1; ix < 16; ++ix) EXPECT_NEAR(r.logbeta(ix, iy), ref(ix, iy), 1e-11);
}

TEST(N2Residuals, SecondOrderOnSolvedF) {
  std::array<N2Residuals, 3> rs{structure_residuals(build_n2(fixtures::solved_f(17))),
                                structure_residuals(build_n2(fixtures::solved_f(33))),
                                structure_residuals(build_n2(fixtures::solved_f(65)))};
  std::array<ScalarField2D, 3> gc{gauss_crosscheck_field(build_n2(fixtures::solved_f(17))),
                                  gauss_crosscheck_field(build_n2(fixtures::solved_f(33))),
                                  gauss_crosscheck_field(build_n2(fixtures::solved_f(65)))};
  auto check = [&](auto get, const char* name) {
    std::array<double, 3> e{};
    for (int g = 0; g < 3; ++g) e[g] = interior_max(get(g), 1 << g, 2 << g);
    EXPECT_GE(e[0] / e[1], 3.5) << name << " " << e[0] << " " << e[1];
    EXPECT_GE(e[1] / e[2], 3.5) << name << " " << e[1] << " " << e[2];
  };
  check([&](int g) -> const ScalarField2D& { return rs[g].diffbeta1; }, "diffbeta1");
  check([&](int g) -> const ScalarField2D& { return rs[g].diffbeta2; }, "diffbeta2");
  check([&](int g) -> const ScalarField2D& { return rs[g].diffa1b2; }, "diffa1b2");
  check([&](int g) -> const ScalarField2D& { return rs[g].diffa2b1; }, "diffa2b1");
  check([&](int g) -> const ScalarField2D& { return gc[g]; }, "gauss");
  for (int g = 0; g < 3; ++g) EXPECT_LE(interior_max(rs[g].logbeta), 1e-9);
}

TEST(N2Residuals, PerturbationGrowsLinearly) {
  const auto f = fixtures::wave_f(33);
  const double base = interior_max(structure_residuals(build_n2(f)).diffa2b1, 1, kComposedMargin);
  const auto r = perturbation_growth(f, {1e-2, 2e-2, 4e-2});
  EXPECT_GT(r[0], base);  // visible above the discretisation error
  EXPECT_NEAR(r[1] / r[0], 2.0, 0.1);
  EXPECT_NEAR(r[2] / r[1], 2.0, 0.1);
}

TEST(N2Residuals, PlaneWaveNeedsNoCornerMargin) {
  std::array<double, 3> e{};
  for (int g = 0; g < 3; ++g) {
    const auto d = build_n2(fixtures::wave_f(16 * (1 << g) + 1));
    const auto r = structure_residuals(d);
    e[g] = std::max({interior_max(r.diffa2b1), interior_max(r.diffa1b2), interior_max(r.diffbeta1),
                     interior_max(r.diffbeta2), interior_max(gauss_crosscheck_field(d))});
  }
  EXPECT_GE(e[0] / e[1], 2.5);
  EXPECT_GE(e[1] / e[2], 3.5);
}

TEST(N2Report, AllPassOnPlaneWave) {
  const auto reps = verify_n2(build_n2(fixtures::wave_f(33)));
  EXPECT_TRUE(all_pass(reps)) << reports_to_json(reps).dump(1);
  EXPECT_TRUE(find_report(reps, "anti_symmetry_literal").informational);
  const Json j = n2_to_json(build_n2(fixtures::solved_f(9)));
  EXPECT_EQ(j.at("beta").at("values").size(), 81u);
}
