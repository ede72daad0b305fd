#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "pbcmps/models.hpp"
#include "pbcmps/spectral.hpp"
#include "pbcmps/transfer.hpp"

namespace pbcmps {

/// Normalized tensor plus its n dominant transfer eigenpairs, shared by all
/// observables of one state on an N-site ring. Read-only after construction.
class RingState {
 public:
  RingState(const MpsTensor& A, long long N, int n, const EigensolverOptions& eig = {});

  long long chain_length() const noexcept { return N_; }
  int bond_dim() const noexcept { return A_.bond_dim(); }
  int rank() const noexcept { return spec_.n; }
  const SpectralApproximation& spectrum() const noexcept { return spec_; }

  /// <I> of the normalized tensor.
  double norm() const noexcept { return norm_; }
  /// Tr*[T_O T^{N-1}] / <I>
  double expectation(const Matrix& O) const;
  /// Tr[T_first T^{dr-1} T_second T^{N-dr-1}] / <I> for 1 <= dr <= N-1. The
  /// shorter arc is contracted exactly when its length is below m.
  double joint(const Matrix& first, const Matrix& second, long long dr, int m) const;
  double connected(const Matrix& first, const Matrix& second, long long dr, int m) const;

 private:
  double arc_pair(const Matrix& P, const Matrix& Q, long long short_arc, long long long_arc, int m) const;

  MpsTensor A_;
  long long N_;
  SpectralApproximation spec_;
  TransferOperator T_;
  double norm_ = 0.0;
};

/// Single-site expectation in the ring state.
double local_expectation(const MpsTensor& A, const Matrix& O, long long N, int n);

struct SublatticeExpectation {
  double even = 0.0;
  double odd = 0.0;
};

/// Original-frame expectation of O on even and odd sites of a rotated model
/// (both entries agree for unrotated models).
SublatticeExpectation local_expectation(const MpsTensor& A, const TwoSiteHamiltonian& model, const Matrix& O,
                                        long long N, int n);

/// Connected <O_0 O_dr> - <O_0><O_dr> in the original frame, 1 <= dr <= N/2.
double correlation_function(const MpsTensor& A, const TwoSiteHamiltonian& model, const Matrix& O, long long N,
                            long long dr, int m, int n);
/// Same on a prepared state; dr may range over the whole ring 1..N-1.
double correlation_function(const RingState& state, const TwoSiteHamiltonian& model, const Matrix& O, long long dr,
                            int m);

/// Correlation at dr = N/2; odd N is rejected.
double half_chain_correlator(const MpsTensor& A, const TwoSiteHamiltonian& model, const Matrix& O, long long N, int m,
                             int n);

struct CorrelationProfile {
  std::string label;
  std::string model;
  long long N = 0;
  int D = 0;
  int m = 0;
  int n = 0;
  std::vector<long long> dr;
  /// Signed values; callers comparing antiferromagnets use |value|.
  std::vector<double> values;
};

/// Gamma(dr) for dr = 1..N/2.
CorrelationProfile correlation_profile(const MpsTensor& A, const TwoSiteHamiltonian& model, const std::string& label,
                                       const Matrix& O, long long N, int m, int n);

/// Columns dr, gamma, abs_gamma after a commented metadata line.
void write_profile_csv(const std::filesystem::path& file, const CorrelationProfile& p);

struct PowerLawFit {
  /// Delta ~ D^{-mu}
  double mu = 0.0;
  double intercept = 0.0;
  double D_min = 0.0;
  double D_max = 0.0;
  /// Root mean square residual in log space.
  double residual = 0.0;
  int points_used = 0;
  std::vector<std::string> warnings;
};

/// Least squares on (log D, log Delta). Nonpositive Delta entries are skipped
/// with a warning; fewer than three usable points throws ValidationError.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

}  // namespace pbcmps
