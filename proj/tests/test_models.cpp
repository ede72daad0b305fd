#include <gtest/gtest.h>

#include "pbcmps/errors.hpp"
#include "pbcmps/models.hpp"
#include "pbcmps/oracles.hpp"

using namespace pbcmps;

namespace {

Vector sorted_spectrum(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  return es.eigenvalues();
}

}  // namespace

TEST(Ising, BondSpectrumAtZeroField) {
  const Vector ev = sorted_spectrum(ising(0.0).h);
  EXPECT_NEAR(ev[0], -1.0, 1e-15);
  EXPECT_NEAR(ev[1], -1.0, 1e-15);
  EXPECT_NEAR(ev[2], 1.0, 1e-15);
  EXPECT_NEAR(ev[3], 1.0, 1e-15);
}

TEST(Ising, DiagonalElement) { EXPECT_EQ(ising(1.0).h(0, 0), -1.0); }

TEST(Ising, RingSumReproducesDenseHamiltonian) {
  // Matrix elements of -sum Z Z - B sum X straight from bit strings; site 0
  // is the most significant bit.
  const int N = 12;
  const double B = 0.7;
  const Matrix h = ising(B).h;
  Vector e = Vector::Zero(1 << N);
  for (int k = 0; k < (1 << N); ++k) {
    Vector col = Vector::Zero(1 << N);
    for (int s = 0; s < N; ++s) {
      const int bs = (k >> (N - 1 - s)) & 1;
      const int bt = (k >> (N - 1 - (s + 1) % N)) & 1;
      col[k] -= bs == bt ? 1.0 : -1.0;
      col[k ^ (1 << (N - 1 - s))] -= B;
    }
    e.setZero();
    e[k] = 1.0;
    ASSERT_LT((apply_ring_hamiltonian(h, 2, N, e) - col).cwiseAbs().maxCoeff(), 1e-14) << "column " << k;
  }
}

TEST(HeisenbergHalf, SpectrumAndSymmetry) {
  const TwoSiteHamiltonian m = heisenberg_half_rotated();
  const Vector ev = sorted_spectrum(m.h);
  EXPECT_NEAR(ev[0], -1.5, 1e-14);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(ev[i], 0.5, 1e-14);
  EXPECT_LT((ev - sorted_spectrum(unrotated_bond(m))).cwiseAbs().maxCoeff(), 1e-14);
  const Matrix P = spin::swap(2);
  EXPECT_EQ(P * m.h * P, m.h);
  EXPECT_EQ(m.h, m.h.transpose());
}

TEST(HeisenbergOne, SpectrumRotationAndSymmetry) {
  const TwoSiteHamiltonian m = heisenberg_one_rotated();
  const Vector ev = sorted_spectrum(m.h);
  const double expected[] = {-2, -1, -1, -1, 1, 1, 1, 1, 1};
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(ev[i], expected[i], 1e-13);
  EXPECT_LT((ev - sorted_spectrum(unrotated_bond(m))).cwiseAbs().maxCoeff(), 1e-13);
  const Matrix M = m.rotation_unitary;
  EXPECT_LT((M * M - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-14);
  const Matrix P = spin::swap(3);
  EXPECT_LT((P * m.h * P - m.h).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(m.h, m.h.transpose());
}

TEST(Rotation, UnrotateObservable) {
  const TwoSiteHamiltonian m = heisenberg_half_rotated();
  EXPECT_EQ(unrotate_observable(m, spin::pauli_z(), SiteParity::odd), Matrix(-spin::pauli_z()));
  EXPECT_EQ(unrotate_observable(m, spin::pauli_x(), SiteParity::odd), Matrix(-spin::pauli_x()));
  EXPECT_EQ(unrotate_observable(m, spin::pauli_z(), SiteParity::even), spin::pauli_z());
  const Matrix I = Matrix::Identity(2, 2);
  EXPECT_EQ(unrotate_observable(m, I, SiteParity::odd), I);
  EXPECT_THROW(unrotate_observable(m, Matrix::Identity(3, 3), SiteParity::odd), DimensionError);
}

TEST(ParseModel, RoundTripAndErrors) {
  EXPECT_EQ(model_string(parse_model("ising:B=1")), "ising:B=1");
  EXPECT_EQ(parse_model("ising:B=0.5").field.value(), 0.5);
  EXPECT_EQ(model_string(parse_model("heisenberg-one")), "heisenberg-one");
  EXPECT_EQ(model_string(parse_model("heisenberg-half")), "heisenberg-half");
  EXPECT_THROW(parse_model("ising:B=abc"), ValidationError);
  EXPECT_THROW(parse_model("ising:B=1x"), ValidationError);
  EXPECT_THROW(parse_model("potts"), ValidationError);
}
