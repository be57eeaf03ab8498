#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ftform/kinematics.hpp"

using namespace ftform;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

}  // namespace

TEST(LocalDisplacement, Examples) {
  const auto id = FrameRotation::identity(2);
  EXPECT_EQ(local_displacement(v2(1, 0), v2(0, 0), id), v2(1, 0));
  const auto quarter = FrameRotation::planar(std::numbers::pi / 2);
  EXPECT_LT((local_displacement(v2(1, 0), v2(0, 0), quarter) - v2(0, -1)).norm(), 1e-15);
  EXPECT_TRUE(local_displacement(v2(3, 4), v2(3, 4), quarter).isZero());
}

TEST(LocalDisplacement, DimensionMismatch) {
  EXPECT_THROW(local_displacement(v3(1, 0, 0), v2(0, 0), FrameRotation::identity(2)), std::invalid_argument);
  EXPECT_THROW(local_displacement(v2(1, 0), v2(0, 0), FrameRotation::identity(3)), std::invalid_argument);
}

TEST(LocalDisplacement, PreservesLength) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int k = 0; k < 100; ++k) {
    const auto r = random_rotation(rng, 3);
    const Vec a = v3(g(rng), g(rng), g(rng)), b = v3(g(rng), g(rng), g(rng));
    EXPECT_NEAR(local_displacement(a, b, r).norm(), (a - b).norm(), 1e-12);
    EXPECT_LT((r.to_global(local_displacement(a, b, r)) - (a - b)).norm(), 1e-12);
  }
}

TEST(FrameRotation, RejectsImproper) {
  Mat reflect(2, 2);
  reflect << 1, 0, 0, -1;
  EXPECT_THROW(FrameRotation{reflect}, std::invalid_argument);
  Mat skew(2, 2);
  skew << 1, 0.1, 0, 1;
  EXPECT_THROW(FrameRotation{skew}, std::invalid_argument);
}

TEST(SgnAlpha, Examples) {
  const Vec s = sgn_alpha(v2(3, 4), 0.5);
  EXPECT_NEAR(s[0], 3 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(s[1], 4 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(s[0], 1.34164, 1e-5);
  EXPECT_NEAR(s[1], 1.78885, 1e-5);
  for (double a : {0.1, 0.5, 1.0}) EXPECT_TRUE(sgn_alpha(v2(0, 0), a).isZero());
  EXPECT_EQ(sgn_alpha(v2(1, 0), 0.25), v2(1, 0));
}

TEST(SgnAlpha, NormIsPower) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10, 10), a(0.05, 1.0);
  for (int k = 0; k < 200; ++k) {
    const Vec x = v3(u(rng), u(rng), u(rng));
    const double al = a(rng);
    EXPECT_NEAR(sgn_alpha(x, al).norm(), std::pow(x.norm(), al), 1e-10 * std::max(1.0, x.norm()));
    EXPECT_NEAR(sgn_alpha(x, al).normalized().dot(x.normalized()), 1.0, 1e-12);
  }
}

TEST(SgnElementwise, Examples) {
  EXPECT_EQ(sgn_elementwise(v3(-2, 0, 5), 0.0), v3(-1, 0, 1));
  Vec one(1);
  one << 1e-3;
  EXPECT_NEAR(sgn_elementwise(one, 1e-3)[0], 0.5, 1e-15);
  one << -7;
  EXPECT_EQ(sgn_elementwise(one, 0.0)[0], -1.0);
}

TEST(SgnElementwise, BoundaryLayerConverges) {
  const Vec u = v3(-0.3, 2e-4, 5.0);
  const Vec exact = sgn_elementwise(u, 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-9}) {
    const double gap = (sgn_elementwise(u, eps) - exact).cwiseAbs().maxCoeff();
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(RandomRotation, Deterministic) {
  EXPECT_EQ(random_rotation(0, 2).matrix(), random_rotation(0, 2).matrix());
  EXPECT_EQ(random_rotation(42, 3).matrix(), random_rotation(42, 3).matrix());
}

TEST(RandomRotation, ProperOrthogonal) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    for (int d : {2, 3}) {
      const Mat r = random_rotation(seed, d).matrix();
      EXPECT_LE((r.transpose() * r - Mat::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    }
  }
}

TEST(RandomRotation, ColumnsUniformOnSphere) {
  Eigen::Matrix3d mean = Eigen::Matrix3d::Zero();
  Eigen::Vector3d second = Eigen::Vector3d::Zero();
  const int n = 1000;
  for (int s = 0; s < n; ++s) {
    const Mat r = random_rotation(static_cast<std::uint64_t>(s) + 1000, 3).matrix();
    mean += r;
    second += r.col(0).cwiseAbs2();
  }
  mean /= n;
  second /= n;
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.1);
  // uniform unit vectors have E[x_k^2] = 1/3
  EXPECT_LT((second.array() - 1.0 / 3.0).abs().maxCoeff(), 0.05);
}
