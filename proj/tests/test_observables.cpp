#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pbcmps/errors.hpp"
#include "pbcmps/models.hpp"
#include "pbcmps/observables.hpp"
#include "pbcmps/oracles.hpp"
#include "test_helpers.hpp"

using namespace pbcmps;
using pbcmps::testing::random_tensor;

namespace {

MpsTensor product_state(const Vector& v) {
  std::vector<Matrix> mats;
  for (Eigen::Index i = 0; i < v.size(); ++i) mats.push_back(Matrix::Constant(1, 1, v(i)));
  return MpsTensor(mats);
}

}  // namespace

TEST(LocalExpectation, IdentityIsOne) {
  const MpsTensor A = random_tensor(2, 3, 11, 1.5);
  EXPECT_NEAR(local_expectation(A, Matrix::Identity(2, 2), 10, 9), 1.0, 1e-12);
}

TEST(LocalExpectation, ProductState) {
  const double t = 0.3;
  Vector v(2);
  v << std::cos(t), std::sin(t);
  const MpsTensor A = product_state(v);
  EXPECT_NEAR(local_expectation(A, spin::pauli_z(), 8, 1), std::cos(2 * t), 1e-14);
  EXPECT_NEAR(local_expectation(A, spin::pauli_x(), 8, 1), std::sin(2 * t), 1e-14);
}

TEST(LocalExpectation, ScaleInvariant) {
  const MpsTensor A = random_tensor(2, 3, 12, 1.0);
  const double a = local_expectation(A, spin::pauli_x(), 12, 9);
  EXPECT_NEAR(local_expectation(A.scaled(2.0), spin::pauli_x(), 12, 9), a, 1e-12);
}

TEST(Correlation, ProductStateVanishes) {
  Vector v(2);
  v << 0.8, 0.6;
  const MpsTensor A = product_state(v);
  const TwoSiteHamiltonian model = ising(1.0);
  for (long long dr = 1; dr <= 5; ++dr)
    EXPECT_NEAR(correlation_function(A, model, spin::pauli_z(), 10, dr, 2, 1), 0.0, 1e-14);
}

TEST(Correlation, IdentityVanishes) {
  const MpsTensor A = random_tensor(2, 3, 13, 1.0);
  const TwoSiteHamiltonian model = ising(1.0);
  const Matrix I = Matrix::Identity(2, 2);
  for (long long dr = 1; dr <= 6; ++dr) EXPECT_NEAR(correlation_function(A, model, I, 12, dr, 3, 9), 0.0, 1e-12);
}

TEST(Correlation, RingSymmetry) {
  const MpsTensor A = random_tensor(2, 3, 14, 1.0);
  const TwoSiteHamiltonian model = ising(1.0);
  const RingState state(A, 14, 9);
  for (long long dr = 1; dr < 14; ++dr) {
    const double a = correlation_function(state, model, spin::pauli_z(), dr, 3);
    const double b = correlation_function(state, model, spin::pauli_z(), 14 - dr, 3);
    EXPECT_NEAR(a, b, 1e-12) << "dr=" << dr;
  }
}

TEST(Correlation, MatchesExactContraction) {
  const MpsTensor A = random_tensor(2, 3, 15, 0.5);
  const TwoSiteHamiltonian model = ising(1.0);
  const int N = 12;
  for (const Matrix& O : {spin::pauli_z(), spin::pauli_x()})
    for (int m : {0, 2, 5})
      for (int dr = 1; dr <= N / 2; ++dr) {
        const double exact = exact_ring_correlator(A, O, O, N, dr);
        EXPECT_NEAR(correlation_function(A, model, O, N, dr, m, 9), exact, 1e-10 * std::max(1.0, std::abs(exact)))
            << "m=" << m << " dr=" << dr;
      }
}

TEST(Correlation, RotatedModelUsesOriginalFrame) {
  const TwoSiteHamiltonian model = heisenberg_half_rotated();
  const MpsTensor A = random_tensor(2, 2, 16, 1.0);
  const int N = 10;
  const Matrix Z = spin::pauli_z();
  for (int dr = 1; dr <= 5; ++dr) {
    const Matrix second = unrotate_observable(model, Z, dr % 2 ? SiteParity::odd : SiteParity::even);
    const double exact = exact_ring_correlator(A, Z, second, N, dr);
    EXPECT_NEAR(correlation_function(A, model, Z, N, dr, 2, 4), exact, 1e-10) << "dr=" << dr;
  }
}

TEST(Correlation, RangeChecked) {
  const MpsTensor A = random_tensor(2, 2, 17, 1.0);
  const TwoSiteHamiltonian model = ising(1.0);
  EXPECT_THROW(correlation_function(A, model, spin::pauli_z(), 10, 0, 2, 4), ValidationError);
  EXPECT_THROW(correlation_function(A, model, spin::pauli_z(), 10, 6, 2, 4), ValidationError);
  EXPECT_THROW(half_chain_correlator(A, model, spin::pauli_z(), 11, 2, 4), ValidationError);
}

TEST(Profile, HalfChainIsLastEntry) {
  const MpsTensor A = random_tensor(2, 3, 18, 1.0);
  const TwoSiteHamiltonian model = ising(1.0);
  const CorrelationProfile p = correlation_profile(A, model, "ZZ", spin::pauli_z(), 16, 4, 9);
  ASSERT_EQ(p.values.size(), 8u);
  EXPECT_EQ(p.dr.back(), 8);
  EXPECT_NEAR(p.values.back(), half_chain_correlator(A, model, spin::pauli_z(), 16, 4, 9), 1e-14);

  const auto file = std::filesystem::temp_directory_path() / "pbcmps_profile_test.csv";
  write_profile_csv(file, p);
  std::ifstream in(file);
  std::string meta, header;
  std::getline(in, meta);
  std::getline(in, header);
  EXPECT_EQ(meta.rfind("# model=", 0), 0u);
  EXPECT_EQ(header, "dr,gamma,abs_gamma");
  std::filesystem::remove(file);
}

TEST(PowerLaw, RecoversExponent) {
  std::vector<std::pair<double, double>> pts;
  for (double D : {8.0, 12.0, 16.0, 20.0}) pts.emplace_back(D, 3.0 * std::pow(D, -7.84));
  const PowerLawFit f = fit_power_law(pts);
  EXPECT_NEAR(f.mu, 7.84, 1e-10);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-10);
  EXPECT_EQ(f.points_used, 4);
  EXPECT_NEAR(f.D_min, 8.0, 1e-12);
  EXPECT_NEAR(f.D_max, 20.0, 1e-12);
  EXPECT_LT(f.residual, 1e-12);
}

TEST(PowerLaw, SkipsNonpositive) {
  const std::vector<std::pair<double, double>> pts = {
      {4, std::pow(4.0, -3.0)}, {8, 0.0}, {12, std::pow(12.0, -3.0)}, {16, -1e-9}, {20, std::pow(20.0, -3.0)}};
  const PowerLawFit f = fit_power_law(pts);
  EXPECT_NEAR(f.mu, 3.0, 1e-10);
  EXPECT_EQ(f.points_used, 3);
  EXPECT_EQ(f.warnings.size(), 2u);
  EXPECT_THROW(fit_power_law({{4, 1e-3}, {8, 0.0}, {12, 1e-5}}), ValidationError);
}
