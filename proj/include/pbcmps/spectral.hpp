#pragma once

#include <cstdint>
#include <vector>

#include "pbcmps/transfer.hpp"

namespace pbcmps {

/// n dominant eigenpairs of a symmetric transfer operator, sorted by
/// descending |lambda| (ties broken by descending lambda).
struct SpectralApproximation {
  int n = 0;
  Vector lambdas;
  std::vector<Vector> vectors;
  Vector residuals;
};

struct EigensolverOptions {
  /// Residual bound ||Tv - lambda v|| <= tol * |lambda_1|.
  double tol = 1e-12;
  int max_restarts = 400;
  std::uint64_t seed = 0x5eedULL;
  /// Dense symmetric eigendecomposition is used when D^2 <= dense_limit and
  /// n is not a small fraction (below 1/6) of D^2.
  Eigen::Index dense_limit = 1024;
  bool force_krylov = false;
  bool force_dense = false;
};

/**
  Dominant eigenpairs of the plain (or any symmetric closed) transfer operator.

  Uses a thick-restart Lanczos iteration with full reorthogonalization on the
  matrix-free operator, or a dense symmetric eigendecomposition below
  dense_limit. Throws DimensionError for n outside [1, D^2] and
  ConvergenceError (carrying the best residual) when restarts run out.
*/
SpectralApproximation dominant_eigs(const TransferOperator& T, int n, const EigensolverOptions& opts = {});

/// lambda^s evaluated as sign(lambda)^s exp(s ln|lambda|), flushed to zero
/// below the smallest normal double.
double truncated_power_weight(double lambda, long long s);

Vector truncated_power_weights(const SpectralApproximation& spec, long long s);

/// sum_a lambda_a^s, i.e. the spectral estimate of Tr[T^s].
double spectral_trace(const SpectralApproximation& spec, long long s);

}  // namespace pbcmps
