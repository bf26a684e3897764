#include <gtest/gtest.h>

#include <random>

#include "ideal/quaternionic.hpp"

using namespace ideal;

namespace {

AmbientVector random_vector(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  AmbientVector v;
  for (auto& c : v.coords) c = n(g);
  return v;
}

HP2Frame random_frame(std::mt19937_64& g) { return HP2Frame(SpherePoint(random_vector(g))); }

AmbientVector random_horizontal(const HP2Frame& f, std::mt19937_64& g) {
  return horizontal_part(f.base(), random_vector(g));
}

AmbientVector unit(AmbientVector v) { return (1.0 / norm(v)) * v; }

}  // namespace

TEST(Quaternionic, MultiplicationTable) {
  std::mt19937_64 g(1);
  for (int n = 0; n < 200; ++n) {
    const AmbientVector v = random_vector(g);
    EXPECT_EQ(kStructureI(kStructureI(v)), -v);
    EXPECT_EQ(kStructureJ(kStructureJ(v)), -v);
    EXPECT_EQ(kStructureK(kStructureK(v)), -v);
    EXPECT_EQ(kStructureI(kStructureJ(v)), kStructureK(v));
    EXPECT_EQ(kStructureJ(kStructureK(v)), kStructureI(v));
    EXPECT_EQ(kStructureK(kStructureI(v)), kStructureJ(v));
    EXPECT_EQ(kStructureJ(kStructureI(v)), -kStructureK(v));
  }
}

TEST(Quaternionic, StructuresAreSkewIsometries) {
  std::mt19937_64 g(2);
  for (int n = 0; n < 200; ++n) {
    const AmbientVector v = random_vector(g), w = random_vector(g);
    for (Structure s : kStructures) {
      EXPECT_NEAR(norm(apply_structure(s, v)), norm(v), 1e-14);
      EXPECT_NEAR(dot(apply_structure(s, v), w), -dot(v, apply_structure(s, w)), 1e-13);
    }
  }
}

TEST(Quaternionic, EmbeddingMatchesComplexStructures) {
  const C3 a{1, 2, 3, 4, 5, 6}, b{-1, 0.5, 2, -3, 0.25, 7};
  const AmbientVector v = AmbientVector::embed(a, b);
  EXPECT_EQ(v.real_part(), a);
  EXPECT_EQ(v.imag_part(), b);
  // i(a + ib) = -b + ia
  EXPECT_EQ(kStructureI(v), AmbientVector::embed(-1.0 * b, a));
  // j restricted to real vectors is the complex structure of C^3
  EXPECT_EQ(kStructureJ(AmbientVector::embed(a)), AmbientVector::embed(apply_j3(a)));
}

TEST(Quaternionic, QuaternionStructureProduct) {
  const QuaternionicStructure i{{1, 0, 0}}, j{{0, 1, 0}};
  const auto k = i.times(j);
  EXPECT_DOUBLE_EQ(k.coeffs[2], 1.0);
  std::mt19937_64 g(3);
  const AmbientVector v = random_vector(g);
  const auto kv = k(v);
  for (int n = 0; n < 12; ++n) EXPECT_DOUBLE_EQ(kv[n], kStructureK(v)[n]);
}

TEST(Quaternionic, SpherePointRejectsZero) {
  EXPECT_THROW(SpherePoint(AmbientVector{}), GeometryError);
}

TEST(Quaternionic, HorizontalSplitIsOrthogonal) {
  std::mt19937_64 g(4);
  const HP2Frame f = random_frame(g);
  const AmbientVector w = random_vector(g);
  const auto split = split_horizontal(f.base(), w);
  EXPECT_NEAR(dot(split.horizontal, f.base().vector()), 0.0, 1e-14);
  for (Structure s : kStructures) EXPECT_NEAR(dot(split.horizontal, f.vertical(s)), 0.0, 1e-13);
  const AmbientVector sum = split.horizontal + split.vertical + split.radial * f.base().vector();
  for (int n = 0; n < 12; ++n) EXPECT_NEAR(sum[n], w[n], 1e-13);
}

TEST(Quaternionic, InducedStructuresSatisfyQuaternionRelations) {
  std::mt19937_64 g(5);
  const HP2Frame f = random_frame(g);
  const AmbientVector x = random_horizontal(f, g);
  const auto I = [&](const AmbientVector& v) { return f.induced(Structure::I, v); };
  const auto J = [&](const AmbientVector& v) { return f.induced(Structure::J, v); };
  const auto K = [&](const AmbientVector& v) { return f.induced(Structure::K, v); };
  const AmbientVector ii = I(I(x)), ij = I(J(x)), kx = K(x);
  for (int n = 0; n < 12; ++n) {
    EXPECT_NEAR(ii[n], -x[n], 1e-13);
    EXPECT_NEAR(ij[n], kx[n], 1e-13);
  }
  EXPECT_LT(f.horizontality_residual(I(x)), 1e-13);
}

TEST(Quaternionic, InducedRejectsVerticalVector) {
  std::mt19937_64 g(6);
  const HP2Frame f = random_frame(g);
  EXPECT_THROW(f.induced(Structure::I, f.vertical(Structure::J)), GeometryError);
}

TEST(Quaternionic, FibreActionPreservesHorizontality) {
  std::mt19937_64 g(7);
  const HP2Frame f = random_frame(g);
  const AmbientVector x = random_horizontal(f, g);
  const std::array<double, 4> q{0.5, 0.5, -0.5, 0.5};
  const HP2Frame moved(SpherePoint(apply_quaternion(q, f.base().vector())));
  EXPECT_LT(moved.horizontality_residual(apply_quaternion(q, x)), 1e-13);
}

TEST(HP2Curvature, QSectionalCurvatureIsFour) {
  std::mt19937_64 g(8);
  for (int n = 0; n < 50; ++n) {
    const HP2Frame f = random_frame(g);
    const AmbientVector x = unit(random_horizontal(f, g));
    for (Structure s : kStructures) {
      const AmbientVector y = f.induced(s, x);
      EXPECT_NEAR(dot(curvature_hp2(f, x, y, y), x), 4.0, 1e-12);
    }
  }
}

TEST(HP2Curvature, OrthogonalComplementCurvatureIsOne) {
  std::mt19937_64 g(9);
  for (int n = 0; n < 50; ++n) {
    const HP2Frame f = random_frame(g);
    const AmbientVector x = unit(random_horizontal(f, g));
    AmbientVector y = random_horizontal(f, g);
    y -= dot(y, x) * x;
    for (Structure s : kStructures) {
      const AmbientVector sx = f.induced(s, x);
      y -= dot(y, sx) * sx;
    }
    y = unit(y);
    EXPECT_NEAR(dot(curvature_hp2(f, x, y, y), x), 1.0, 1e-12);
  }
}

TEST(HP2Curvature, SymmetriesAndBianchi) {
  std::mt19937_64 g(10);
  const HP2Frame f = random_frame(g);
  const AmbientVector x = random_horizontal(f, g), y = random_horizontal(f, g), z = random_horizontal(f, g),
                      w = random_horizontal(f, g);
  const AmbientVector bianchi = curvature_hp2(f, x, y, z) + curvature_hp2(f, y, z, x) + curvature_hp2(f, z, x, y);
  EXPECT_LT(max_abs(bianchi), 1e-12);
  EXPECT_LT(max_abs(curvature_hp2(f, x, y, z) + curvature_hp2(f, y, x, z)), 1e-12);
  EXPECT_NEAR(dot(curvature_hp2(f, x, y, z), w), -dot(curvature_hp2(f, x, y, w), z), 1e-12);
  EXPECT_NEAR(dot(curvature_hp2(f, x, y, z), w), dot(curvature_hp2(f, z, w, x), y), 1e-12);
}
