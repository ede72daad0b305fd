#include <gtest/gtest.h>

#include "pbcmps/errors.hpp"
#include "pbcmps/gradient.hpp"
#include "pbcmps/models.hpp"
#include "pbcmps/oracles.hpp"
#include "test_helpers.hpp"

using namespace pbcmps;
using pbcmps::testing::random_tensor;

TEST(GeometricSum, Examples) {
  EXPECT_NEAR(geometric_sum(1.0, 1.0, 7), 7.0, 1e-14);
  EXPECT_NEAR(geometric_sum(0.5, 1.0, 3), 1.75, 1e-14);
  EXPECT_NEAR(geometric_sum(-0.5, 0.25, 3), 0.25 * 0.25 - 0.5 * 0.25 + 0.25, 1e-14);
  EXPECT_EQ(geometric_sum(0.3, 0.2, 0), 0.0);
}

TEST(GeometricSum, ContinuousAcrossDegenerateThreshold) {
  for (double delta : {1e-11, 1e-10, 1.01e-10, 1e-9}) {
    const double la = 0.9;
    const double lb = 0.9 * (1.0 + delta);
    double direct = 0.0;
    for (int t = 0; t < 40; ++t) direct += std::pow(lb, t) * std::pow(la, 39 - t);
    EXPECT_NEAR(geometric_sum(la, lb, 40), direct, 1e-12 * direct);
  }
}

class GradientVsExact : public ::testing::TestWithParam<int> {};

TEST_P(GradientVsExact, FullRankMatchesDenseContraction) {
  const int which = GetParam();
  const TwoSiteHamiltonian model =
      which == 0 ? ising(0.7) : (which == 1 ? heisenberg_half_rotated() : heisenberg_one_rotated());
  const int D = 3;
  const int N = 10;
  const MpsTensor A = random_tensor(model.d, D, 100 + which, 1.5);
  for (int m : {0, 1, 4}) {
    const EnergyGradient g = energy_gradient(A, model.h, N, m, D * D);
    const ExactRingResult ex = exact_ring_contraction(A, model.h, N);
    EXPECT_NEAR(g.value, ex.energy_density, 1e-11 * std::abs(ex.energy_density)) << "m=" << m;
    // Raw tensors refer to the normalized tensor; both are of degree 2N-1 in A.
    const double lam = g.diagnostics.lambda1;
    const double s_neff = std::pow(lam, -N) * std::sqrt(lam);
    const double s_heff = s_neff;
    const SlotTensor dn = g.neff - s_neff * ex.neff;
    const SlotTensor dh = g.heff - s_heff * ex.heff;
    EXPECT_LT(dn.max_abs(), 1e-10 * (s_neff * ex.neff.max_abs())) << "m=" << m;
    EXPECT_LT(dh.max_abs(), 1e-10 * (s_heff * ex.heff.max_abs())) << "m=" << m;
  }
}

TEST_P(GradientVsExact, MatchesFiniteDifferences) {
  const int which = GetParam();
  const TwoSiteHamiltonian model =
      which == 0 ? ising(1.0) : (which == 1 ? heisenberg_half_rotated() : heisenberg_one_rotated());
  const int D = 3;
  const int N = 10;
  const MpsTensor A = random_tensor(model.d, D, 200 + which, 1.0);
  const EnergyGradient g = energy_gradient(A, model.h, N, 4, D * D);
  const ParamVector x = pack(A);
  Vector fd(x.size());
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    ParamVector p = x;
    ParamVector q = x;
    p.values[k] += h;
    q.values[k] -= h;
    fd[k] = (exact_ring_energy(unpack(p, model.d, D), model.h, N) -
             exact_ring_energy(unpack(q, model.d, D), model.h, N)) /
            (2 * h);
  }
  EXPECT_LT((g.gradient - fd).norm() / fd.norm(), 1e-7);
}

INSTANTIATE_TEST_SUITE_P(Models, GradientVsExact, ::testing::Values(0, 1, 2));

TEST(Gradient, ScaleInvariance) {
  const MpsTensor A = random_tensor(2, 4, 5, 1.0);
  const Matrix h = ising(1.0).h;
  const EnergyGradient g1 = energy_gradient(A, h, 20, 3, 8);
  const EnergyGradient g2 = energy_gradient(A.scaled(3.0), h, 20, 3, 8);
  EXPECT_NEAR(g1.value, g2.value, 1e-12 * std::abs(g1.value));
  EXPECT_LT((g1.gradient - 3.0 * g2.gradient).norm(), 1e-10 * g1.gradient.norm());
}

TEST(Gradient, MZeroMatchesExactOnlyAtFullRank) {
  const MpsTensor A = random_tensor(2, 3, 8, 1.0);
  const Matrix h = ising(0.5).h;
  const double exact = exact_ring_energy(A, h, 12);
  EXPECT_NEAR(energy_gradient(A, h, 12, 0, 9).value, exact, 1e-11);
  EXPECT_NEAR(energy_density(A, h, 12, 9), exact, 1e-11);
}

TEST(Gradient, ValidationErrors) {
  const MpsTensor A = random_tensor(2, 2, 1, 1.0);
  const Matrix h = ising(1.0).h;
  EXPECT_THROW(energy_gradient(A, h, 10, 5, 4), ValidationError);
  EXPECT_THROW(energy_gradient(A, h, 10, -1, 4), ValidationError);
  EXPECT_THROW(energy_gradient(A, h, 10, 1, 5), ValidationError);
  EXPECT_THROW(energy_gradient(A, h, 10, 1, 0), ValidationError);
  EXPECT_THROW(energy_gradient(A, Matrix::Zero(3, 3), 10, 1, 4), DimensionError);
}
