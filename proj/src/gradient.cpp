#include "pbcmps/gradient.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pbcmps/errors.hpp"

namespace pbcmps {
namespace {

// Spectral terms whose weight is below this fraction of the dominant one
// cannot change a double-precision result and are skipped.
constexpr double kNegligibleWeight = 1e-17;

constexpr double kDegenerateThreshold = 1e-10;

SpectralApproximation normalized_spectrum(const MpsTensor& A, int n, const EigensolverOptions& eig, double& lambda1) {
  SpectralApproximation s = dominant_eigs(TransferOperator::plain(A), n, eig);
  lambda1 = s.lambdas[0];
  if (!(lambda1 > 0.0)) throw NonPhysicalStateError("transfer matrix has no positive dominant eigenvalue");
  s.lambdas /= lambda1;
  s.residuals /= lambda1;
  return s;
}

void validate_ring(long long N, int m, int n, int D) {
  if (N < 2) throw ValidationError("chain length N must be at least 2");
  if (m < 0 || 2LL * m > N - 2)
    throw ValidationError("cutoff m must lie in [0, (N-2)/2], got " + std::to_string(m));
  if (n < 1 || n > D * D) throw ValidationError("spectral rank n must lie in [1, D^2], got " + std::to_string(n));
}

}  // namespace

GradientWorkspace::GradientWorkspace(const MpsTensor& A, const Matrix& h, long long N, int m, int n,
                                     const EigensolverOptions& eig)
    : h_(h),
      N_(N),
      m_(m),
      n_(n),
      T_(TransferOperator::plain(A)),
      vacant_(TransferOperator::vacant(A)),
      H_(TransferOperator::plain(A)),
      H_left_(TransferOperator::vacant(A)),
      H_right_(TransferOperator::vacant(A)) {
  validate_ring(N, m, n, A.bond_dim());
  const int d = A.phys_dim();
  if (h.rows() != d * d || h.cols() != d * d) throw DimensionError("bond term must be d^2 x d^2");

  double lambda1 = 0.0;
  spec_ = normalized_spectrum(A, n, eig, lambda1);
  scale_ = std::sqrt(lambda1);
  A_ = normalize(A, lambda1);

  T_ = TransferOperator::plain(A_);
  vacant_ = TransferOperator::vacant(A_);
  H_ = TransferOperator::hamiltonian(A_, h_);
  H_left_ = TransferOperator::hamiltonian(A_, h_, TransferKind::hamiltonian_left);
  H_right_ = TransferOperator::hamiltonian(A_, h_, TransferKind::hamiltonian_right);

  h_images_.reserve(static_cast<std::size_t>(n));
  for (const auto& v : spec_.vectors) h_images_.push_back(H_.apply(v));
  h_proj_.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      h_proj_(a, b) = spec_.vectors[static_cast<std::size_t>(a)].dot(h_images_[static_cast<std::size_t>(b)]);
  h_proj_ = 0.5 * (h_proj_ + h_proj_.transpose()).eval();
}

NormAndNeff norm_and_neff(const GradientWorkspace& ws) {
  const auto& spec = ws.spectrum();
  const long long N = ws.chain_length();
  NormAndNeff out;
  out.norm = spectral_trace(spec, N);
  if (!(out.norm > 0.0)) throw NonPhysicalStateError("norm <I> is not positive");
  out.neff = SlotTensor(ws.tensor().phys_dim(), ws.tensor().bond_dim());
  const Vector w = truncated_power_weights(spec, N - 1);
  for (int a = 0; a < spec.n; ++a) {
    if (std::abs(w[a]) <= kNegligibleWeight * std::abs(w[0])) continue;
    const Vector& v = spec.vectors[static_cast<std::size_t>(a)];
    out.neff += w[a] * ws.vacant().open_sandwich(v, v);
  }
  return out;
}

SlotTensor heff_easy(const GradientWorkspace& ws) {
  const auto& spec = ws.spectrum();
  SlotTensor out(ws.tensor().phys_dim(), ws.tensor().bond_dim());
  const Vector w = truncated_power_weights(spec, ws.chain_length() - 2);
  for (int a = 0; a < spec.n; ++a) {
    if (std::abs(w[a]) <= kNegligibleWeight * std::abs(w[0])) continue;
    const Vector& v = spec.vectors[static_cast<std::size_t>(a)];
    out += w[a] * (ws.hamiltonian_left().open_sandwich(v, v) + ws.hamiltonian_right().open_sandwich(v, v));
  }
  return out;
}

SlotTensor heff_extremal(const GradientWorkspace& ws) {
  const auto& spec = ws.spectrum();
  const int D = ws.tensor().bond_dim();
  const long long N = ws.chain_length();
  const int m = ws.cutoff();
  SlotTensor small(ws.tensor().phys_dim(), D);
  if (m == 0) return small;

  for (int a = 0; a < spec.n; ++a) {
    const double lam = spec.lambdas[a];
    // Largest weight over s < m belongs to s = m - 1.
    if (std::abs(truncated_power_weight(lam, N - 2 - m)) <= kNegligibleWeight) continue;
    // The open contraction is linear in the left vector, so the s-sum is
    // accumulated before contracting: Y = sum_s lambda^{N-3-s} T^s H v.
    Matrix term = as_matrix(ws.hamiltonian_images()[static_cast<std::size_t>(a)], D);
    Matrix acc = Matrix::Zero(D, D);
    for (int s = 0; s < m; ++s) {
      acc += truncated_power_weight(lam, N - 3 - s) * term;
      if (s + 1 < m) term = ws.transfer().apply(term);
    }
    small += ws.vacant().open_sandwich(as_vector(acc), spec.vectors[static_cast<std::size_t>(a)]);
  }
  return small + small.transposed_blocks();
}

double geometric_sum(double la, double lb, long long K) {
  if (K <= 0) return 0.0;
  const double scale = std::max(std::abs(la), std::abs(lb));
  if (scale == 0.0) return K == 1 ? 1.0 : 0.0;
  if (std::abs(la - lb) <= kDegenerateThreshold * scale) {
    return static_cast<double>(K) * truncated_power_weight(0.5 * (la + lb), K - 1);
  }
  if ((la > 0.0 && lb > 0.0) || (la < 0.0 && lb < 0.0)) {
    // big^{K-1} (1 - q^K) / (1 - q) with q = small / big in (0, 1); avoids the
    // cancellation in lb^K - la^K for nearby eigenvalues.
    const double big = std::abs(la) >= std::abs(lb) ? la : lb;
    const double small = std::abs(la) >= std::abs(lb) ? lb : la;
    const double one_minus_q = (big - small) / big;
    const double log_q = std::log1p(-one_minus_q);
    const double numerator = -std::expm1(static_cast<double>(K) * log_q);
    return truncated_power_weight(big, K - 1) * numerator / one_minus_q;
  }
  return (truncated_power_weight(lb, K) - truncated_power_weight(la, K)) / (lb - la);
}

SlotTensor heff_medium(const GradientWorkspace& ws) {
  const auto& spec = ws.spectrum();
  const int D = ws.tensor().bond_dim();
  const long long N = ws.chain_length();
  const int m = ws.cutoff();
  const long long K = N - 2 - 2LL * m;
  SlotTensor out(ws.tensor().phys_dim(), D);
  if (K < 1) return out;

  const int n = spec.n;
  const Vector wm = truncated_power_weights(spec, m);
  Matrix coeff(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      coeff(a, b) = ws.hamiltonian_projection()(a, b) * wm[a] * wm[b] *
                    geometric_sum(spec.lambdas[a], spec.lambdas[b], K);
  const double cmax = coeff.cwiseAbs().maxCoeff();

  // sum_{a,b} coeff(a,b) V_b A_i V_a^T = sum_b V_b A_i X_b^T with X_b = sum_a coeff(a,b) V_a.
  Matrix basis(ws.tensor().bond_dim() * D, n);
  for (int a = 0; a < n; ++a) basis.col(a) = spec.vectors[static_cast<std::size_t>(a)];
  const Matrix mixed = basis * coeff;
  for (int b = 0; b < n; ++b) {
    if (coeff.col(b).cwiseAbs().maxCoeff() <= kNegligibleWeight * cmax) continue;
    out += ws.vacant().open_sandwich(spec.vectors[static_cast<std::size_t>(b)], mixed.col(b));
  }
  return out;
}

EnergyGradient energy_gradient(const GradientWorkspace& ws, bool per_site) {
  const auto& spec = ws.spectrum();
  const long long N = ws.chain_length();
  EnergyGradient out;

  NormAndNeff nn = norm_and_neff(ws);
  const Vector w = truncated_power_weights(spec, N - 2);
  double numerator = 0.0;
  for (int a = 0; a < spec.n; ++a) numerator += w[a] * ws.hamiltonian_projection()(a, a);
  out.value = numerator / nn.norm;
  out.norm_value = nn.norm;

  const SlotTensor easy = heff_easy(ws);
  const SlotTensor extremal = heff_extremal(ws);
  const SlotTensor medium = heff_medium(ws);
  out.heff = easy + extremal + medium;
  out.neff = nn.neff;

  // d rho / dA = 2 (H_eff - N rho N_eff) / <I>; bra and ket derivatives coincide for real symmetric data.
  SlotTensor raw = out.heff - (static_cast<double>(N) * out.value) * out.neff;
  raw *= 2.0 / nn.norm;
  // Back to the caller's scale: rho(cA) = rho(A) gives grad(A) = grad(A / c) / c.
  raw *= 1.0 / ws.scale();
  if (!per_site) raw *= static_cast<double>(N);
  out.gradient = pack_gradient(raw);
  if (!out.gradient.allFinite()) throw NumericalError("energy gradient contains non-finite entries");

  out.diagnostics.easy_norm = easy.frobenius();
  out.diagnostics.extremal_norm = extremal.frobenius();
  out.diagnostics.medium_norm = medium.frobenius();
  out.diagnostics.neff_norm = nn.neff.frobenius();
  out.diagnostics.lambda1 = ws.scale() * ws.scale();
  out.diagnostics.tail_ratio = std::abs(spec.lambdas[spec.n - 1]);
  return out;
}

EnergyGradient energy_gradient(const MpsTensor& A, const Matrix& h, long long N, int m, int n,
                               const EigensolverOptions& eig, bool per_site) {
  return energy_gradient(GradientWorkspace(A, h, N, m, n, eig), per_site);
}

double energy_density(const MpsTensor& A, const Matrix& h, long long N, int n, const EigensolverOptions& eig) {
  validate_ring(N, 0, n, A.bond_dim());
  double lambda1 = 0.0;
  const SpectralApproximation spec = normalized_spectrum(A, n, eig, lambda1);
  const MpsTensor An = normalize(A, lambda1);
  const TransferOperator H = TransferOperator::hamiltonian(An, h);
  const double norm = spectral_trace(spec, N);
  if (!(norm > 0.0)) throw NonPhysicalStateError("norm <I> is not positive");
  const Vector w = truncated_power_weights(spec, N - 2);
  double numerator = 0.0;
  for (int a = 0; a < spec.n; ++a) {
    const Vector& v = spec.vectors[static_cast<std::size_t>(a)];
    numerator += w[a] * H.sandwich(v, v);
  }
  return numerator / norm;
}

}  // namespace pbcmps
