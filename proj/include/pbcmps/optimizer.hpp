#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pbcmps/gradient.hpp"
#include "pbcmps/models.hpp"

namespace pbcmps {

struct LineSearchConfig {
  /// Sufficient-decrease constant.
  double c1 = 1e-4;
  /// Curvature constant (strong Wolfe).
  double c2 = 0.1;
  /// Energy/gradient evaluations per line search.
  int max_evaluations = 30;
};

struct OptimizeConfig {
  int max_iterations = 5000;
  /// Infinity norm of the packed gradient.
  double gradient_tolerance = 1e-9;
  /// Relative energy change over one restart period.
  double energy_tolerance = 1e-13;
  LineSearchConfig line_search;
  /// Iterations between forced steepest-descent restarts; 0 means the
  /// number of free parameters.
  int restart_period = 0;
  /// Precondition search directions with the tangent metric dA -> V dA V,
  /// V the dominant transfer eigenvector as a D x D matrix.
  bool precondition = true;
  /// Eigenvalues of V (scaled to a largest value of one) are floored here.
  double precondition_floor = 1e-6;
  std::uint64_t seed = 1;
  EigensolverOptions eig;
  /// Write a checkpoint every this many iterations (0 disables).
  int checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;

  /// Throws ValidationError on nonpositive tolerances or 0 < c1 < c2 < 1 violated.
  void validate() const;
};

struct ScanConfig {
  /// Slope of the scan line n = k m.
  double k = 0.2;
  double plateau_tolerance = 1e-12;
  /// Keep m fixed (clamped to m_max) and walk n only.
  std::optional<int> fixed_m;
  void validate() const;
};

enum class StopReason { gradient, energy, line_search_failed, max_iterations };
const char* to_string(StopReason r);

struct ScanPoint {
  int m = 0;
  int n = 0;
  double energy = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct RunResult {
  MpsTensor tensor;
  std::string model;
  long long N = 0;
  double energy = 0.0;
  /// Infinity norm of the packed gradient at the returned tensor.
  double gradient_norm = 0.0;
  int m = 0;
  int n = 0;
  std::vector<ScanPoint> trace;
  /// Energy after every accepted step, starting point first (last scan point
  /// only for scans).
  std::vector<double> energy_history;
  int iterations = 0;
  double wall_seconds = 0.0;
  bool converged = false;
  StopReason reason = StopReason::max_iterations;
  /// Scans only; false when n reached D^2 without two matching points.
  bool plateau_detected = true;
};

/// Polak-Ribiere+ conjugate gradient with a strong Wolfe line search.
/// Throws NumericalError when the energy or gradient turns non-finite.
RunResult minimize(const MpsTensor& A0, const TwoSiteHamiltonian& model, long long N, int m, int n,
                   const OptimizeConfig& cfg = {});

/// Optimizes along the (m, n) scan line, warm-starting every point from the
/// previous optimum, until two consecutive energies agree to plateau_tolerance.
RunResult scan_mn(const MpsTensor& A0, const TwoSiteHamiltonian& model, long long N, const ScanConfig& scan = {},
                  const OptimizeConfig& cfg = {});

/// (m, n) pairs visited by scan_mn for a bond dimension D.
std::vector<std::pair<int, int>> scan_points(long long N, int D, const ScanConfig& scan);

enum class InitStrategy { file, continuation, perturbed_product, random };
const char* to_string(InitStrategy s);
InitStrategy parse_init_strategy(const std::string& s);

struct InitRequest {
  InitStrategy strategy = InitStrategy::perturbed_product;
  std::uint64_t seed = 1;
  /// Smaller optimized tensor for continuation.
  std::optional<MpsTensor> source;
  /// Tensor file for the file strategy.
  std::filesystem::path file;
};

MpsTensor initialize(const TwoSiteHamiltonian& model, int D, const InitRequest& req);

/// Optimizes at each bond dimension in turn, embedding the previous optimum
/// into the next one; the first is started from a perturbed product state.
std::vector<RunResult> continuation_chain(const TwoSiteHamiltonian& model, long long N, const std::vector<int>& Ds,
                                          const ScanConfig& scan, const OptimizeConfig& cfg, std::uint64_t seed);

}  // namespace pbcmps
