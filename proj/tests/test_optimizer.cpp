#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "pbcmps/errors.hpp"
#include "pbcmps/io.hpp"
#include "pbcmps/models.hpp"
#include "pbcmps/optimizer.hpp"
#include "pbcmps/oracles.hpp"

using namespace pbcmps;

namespace {

MpsTensor start(const TwoSiteHamiltonian& model, int D, std::uint64_t seed = 1) {
  InitRequest req;
  req.seed = seed;
  return initialize(model, D, req);
}

}  // namespace

TEST(Minimize, ClassicalIsingBondDimensionOne) {
  const TwoSiteHamiltonian model = ising(0.0);
  const RunResult r = minimize(start(model, 1), model, 10, 4, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.energy, -1.0, 1e-12);
  EXPECT_LE(r.iterations, 10);
}

TEST(Minimize, SmallRingAgainstEd) {
  const TwoSiteHamiltonian model = ising(1.0);
  const int N = 10;
  const double exact = exact_diagonalize(model, N).energy / N;
  const RunResult r = minimize(start(model, 4), model, N, 4, 16);
  EXPECT_TRUE(r.converged) << to_string(r.reason);
  EXPECT_GE(r.energy, exact - 1e-12);
  EXPECT_LT((r.energy - exact) / std::abs(exact), 1e-4);
}

TEST(Minimize, MonotoneDescent) {
  const TwoSiteHamiltonian model = heisenberg_half_rotated();
  const RunResult r = minimize(start(model, 3, 4), model, 12, 3, 9);
  ASSERT_GE(r.energy_history.size(), 2u);
  for (std::size_t i = 1; i < r.energy_history.size(); ++i)
    EXPECT_LE(r.energy_history[i], r.energy_history[i - 1]) << "step " << i;
  EXPECT_EQ(r.energy_history.back(), r.energy);
}

TEST(Minimize, Deterministic) {
  const TwoSiteHamiltonian model = ising(0.5);
  OptimizeConfig cfg;
  cfg.max_iterations = 200;
  const RunResult a = minimize(start(model, 3, 9), model, 14, 3, 5, cfg);
  const RunResult b = minimize(start(model, 3, 9), model, 14, 3, 5, cfg);
  EXPECT_EQ(a.energy, b.energy);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_TRUE(a.tensor == b.tensor);
}

TEST(Minimize, PreconditionedAndPlainAgree) {
  const TwoSiteHamiltonian model = ising(1.0);
  OptimizeConfig plain;
  plain.precondition = false;
  const RunResult a = minimize(start(model, 4), model, 30, 14, 16);
  const RunResult b = minimize(start(model, 4), model, 30, 14, 16, plain);
  EXPECT_TRUE(a.converged) << to_string(a.reason);
  EXPECT_NEAR(a.energy, b.energy, 1e-10);
  EXPECT_LE(a.iterations, b.iterations);
}

TEST(Minimize, RejectsMismatchedTensor) {
  EXPECT_THROW(minimize(start(ising(1.0), 2), heisenberg_one_rotated(), 10, 2, 2), DimensionError);
}

TEST(Config, Validation) {
  OptimizeConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.max_iterations = -1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.precondition_floor = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.line_search.c2 = 1e-5;
  EXPECT_THROW(cfg.validate(), ValidationError);
  ScanConfig scan;
  EXPECT_NO_THROW(scan.validate());
  scan.k = 0.0;
  EXPECT_THROW(scan.validate(), ValidationError);
  scan = {};
  scan.plateau_tolerance = -1.0;
  EXPECT_THROW(scan.validate(), ValidationError);
}

TEST(ScanPoints, FollowsLineThenMaximalM) {
  const auto pts = scan_points(100, 4, ScanConfig{});
  ASSERT_GE(pts.size(), 4u);
  EXPECT_EQ(pts[0], (std::pair{5, 1}));
  EXPECT_EQ(pts[1], (std::pair{10, 2}));
  EXPECT_EQ(pts[3], (std::pair{20, 4}));
  EXPECT_EQ(pts.back(), (std::pair{49, 16}));
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GE(pts[i].first, pts[i - 1].first);
    EXPECT_GT(pts[i].second, pts[i - 1].second);
  }
}

TEST(ScanPoints, FixedM) {
  ScanConfig scan;
  scan.fixed_m = 3;
  const auto pts = scan_points(20, 2, scan);
  ASSERT_EQ(pts.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(pts[static_cast<std::size_t>(i)], (std::pair{3, i + 1}));
}

TEST(Scan, BondDimensionOneIsTrivialPlateau) {
  const TwoSiteHamiltonian model = ising(0.0);
  const RunResult r = scan_mn(start(model, 1), model, 20);
  EXPECT_TRUE(r.plateau_detected);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_NEAR(r.energy, -1.0, 1e-12);
}

TEST(Scan, FindsPlateauOnSmallRing) {
  const TwoSiteHamiltonian model = ising(1.0);
  ScanConfig scan;
  scan.plateau_tolerance = 1e-10;
  const RunResult r = scan_mn(start(model, 2), model, 16, scan);
  EXPECT_TRUE(r.plateau_detected);
  EXPECT_TRUE(r.converged);
  EXPECT_GE(r.trace.size(), 2u);
  const double exact = reference_ground_energy(model, 16).value() / 16;
  EXPECT_LT((r.energy - exact) / std::abs(exact), 1e-2);
}

TEST(Initialize, Strategies) {
  const TwoSiteHamiltonian model = ising(1.0);
  InitRequest req;
  req.strategy = InitStrategy::random;
  req.seed = 5;
  const MpsTensor a = initialize(model, 3, req);
  EXPECT_TRUE(a == initialize(model, 3, req));
  req.seed = 6;
  EXPECT_FALSE(a == initialize(model, 3, req));

  req.strategy = InitStrategy::continuation;
  req.source = a;
  const MpsTensor b = initialize(model, 5, req);
  EXPECT_EQ(b.bond_dim(), 5);
  for (int i = 0; i < 2; ++i) EXPECT_TRUE(b[i].topLeftCorner(3, 3) == a[i]);
  EXPECT_THROW(initialize(model, 2, req), ValidationError);
  req.source.reset();
  EXPECT_THROW(initialize(model, 5, req), ValidationError);

  const auto file = std::filesystem::temp_directory_path() / "pbcmps_init_test.txt";
  write_tensor(file, a);
  req.strategy = InitStrategy::file;
  req.file = file;
  EXPECT_TRUE(initialize(model, 3, req) == a);
  EXPECT_THROW(initialize(model, 4, req), ValidationError);
  EXPECT_THROW(initialize(heisenberg_one_rotated(), 3, req), ValidationError);
  std::filesystem::remove(file);
}

TEST(Initialize, ParseStrategy) {
  for (auto s : {InitStrategy::file, InitStrategy::continuation, InitStrategy::perturbed_product, InitStrategy::random})
    EXPECT_EQ(parse_init_strategy(to_string(s)), s);
  EXPECT_THROW(parse_init_strategy("imps"), ValidationError);
}

TEST(ContinuationChain, EnergiesDecrease) {
  const TwoSiteHamiltonian model = ising(1.0);
  const auto runs = continuation_chain(model, 16, {1, 2, 3}, ScanConfig{}, OptimizeConfig{}, 3);
  ASSERT_EQ(runs.size(), 3u);
  for (std::size_t i = 1; i < runs.size(); ++i) EXPECT_LE(runs[i].energy, runs[i - 1].energy + 1e-12);
}
