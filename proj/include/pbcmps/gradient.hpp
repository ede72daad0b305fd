#pragma once

#include <vector>

#include "pbcmps/spectral.hpp"
#include "pbcmps/transfer.hpp"

namespace pbcmps {

/**
  Everything needed to evaluate the energy density and its gradient for one
  tensor on an N-site ring with exact-contraction cutoff m and spectral rank n.

  The tensor is rescaled on construction so that the dominant transfer
  eigenvalue equals one; scale() reports the factor sqrt(lambda_1) that was
  divided out. Single owner, not meant to be shared.
*/
class GradientWorkspace {
 public:
  /// Throws ValidationError unless N >= 2, 0 <= m <= (N-2)/2 and 1 <= n <= D^2.
  GradientWorkspace(const MpsTensor& A, const Matrix& h, long long N, int m, int n,
                    const EigensolverOptions& eig = {});

  const MpsTensor& tensor() const noexcept { return A_; }
  double scale() const noexcept { return scale_; }
  long long chain_length() const noexcept { return N_; }
  int cutoff() const noexcept { return m_; }
  int rank() const noexcept { return n_; }
  const SpectralApproximation& spectrum() const noexcept { return spec_; }
  const Matrix& bond() const noexcept { return h_; }

  const TransferOperator& transfer() const noexcept { return T_; }
  const TransferOperator& vacant() const noexcept { return vacant_; }
  const TransferOperator& hamiltonian() const noexcept { return H_; }
  const TransferOperator& hamiltonian_left() const noexcept { return H_left_; }
  const TransferOperator& hamiltonian_right() const noexcept { return H_right_; }

  /// H_AA^AA applied to every retained eigenvector.
  const std::vector<Vector>& hamiltonian_images() const noexcept { return h_images_; }
  /// <v_a| H_AA^AA |v_b>
  const Matrix& hamiltonian_projection() const noexcept { return h_proj_; }

 private:
  MpsTensor A_;
  Matrix h_;
  double scale_ = 1.0;
  long long N_;
  int m_;
  int n_;
  SpectralApproximation spec_;
  TransferOperator T_;
  TransferOperator vacant_;
  TransferOperator H_;
  TransferOperator H_left_;
  TransferOperator H_right_;
  std::vector<Vector> h_images_;
  Matrix h_proj_;
};

struct NormAndNeff {
  /// <I> = sum_a lambda_a^N
  double norm = 0.0;
  /// Tr*[T_A T^{N-1}], derivative of <I> with respect to one ket tensor.
  SlotTensor neff;
};

/// Throws NonPhysicalStateError when <I> <= 0.
NormAndNeff norm_and_neff(const GradientWorkspace& ws);

/// Tr*[H_AA^{.A} T^{N-2}] + Tr*[H_AA^{A.} T^{N-2}] in the spectral approximation.
SlotTensor heff_easy(const GradientWorkspace& ws);

/// Hard terms with s < m contracted exactly, plus their mirror images for
/// s > N-3-m obtained by transposing the open virtual indices.
SlotTensor heff_extremal(const GradientWorkspace& ws);

/// Hard terms with m <= s <= N-3-m summed in closed form over s.
SlotTensor heff_medium(const GradientWorkspace& ws);

/// sum_{t=0}^{K-1} lb^t la^{K-1-t} = (lb^K - la^K) / (lb - la), with the
/// degenerate limit K lambda^{K-1} taken when |la - lb| <= 1e-10 max(|la|, |lb|).
double geometric_sum(double la, double lb, long long K);

struct GradientDiagnostics {
  double easy_norm = 0.0;
  double extremal_norm = 0.0;
  double medium_norm = 0.0;
  double neff_norm = 0.0;
  double lambda1 = 0.0;
  /// |lambda_n / lambda_1| of the smallest retained pair.
  double tail_ratio = 0.0;
};

struct EnergyGradient {
  /// Energy density per bond.
  double value = 0.0;
  /// d value / d ParamVector (or total energy when per_site is false).
  Vector gradient;
  /// <I> of the normalized tensor.
  double norm_value = 0.0;
  /// Raw derivative tensors of the normalized tensor, before packing.
  SlotTensor heff;
  SlotTensor neff;
  GradientDiagnostics diagnostics;
};

EnergyGradient energy_gradient(const GradientWorkspace& ws, bool per_site = true);

EnergyGradient energy_gradient(const MpsTensor& A, const Matrix& h, long long N, int m, int n,
                               const EigensolverOptions& eig = {}, bool per_site = true);

/// Spectral energy density only, without gradient work.
double energy_density(const MpsTensor& A, const Matrix& h, long long N, int n, const EigensolverOptions& eig = {});

}  // namespace pbcmps
