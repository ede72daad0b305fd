#include "pbcmps/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "pbcmps/errors.hpp"

namespace pbcmps {
namespace {

std::vector<Eigen::Index> magnitude_order(const Vector& values) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(values[a]);
    const double mb = std::abs(values[b]);
    if (ma != mb) return ma > mb;
    return values[a] > values[b];
  });
  return idx;
}

void finalize_residuals(const TransferOperator& T, SpectralApproximation& s) {
  s.residuals.resize(s.n);
  for (int a = 0; a < s.n; ++a) {
    const Vector& v = s.vectors[static_cast<std::size_t>(a)];
    s.residuals[a] = (T.apply(v) - s.lambdas[a] * v).norm();
  }
}

SpectralApproximation dense_eigs(const TransferOperator& T, int n) {
  Matrix M = T.dense();
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", std::numeric_limits<double>::infinity());
  const auto order = magnitude_order(es.eigenvalues());
  SpectralApproximation s;
  s.n = n;
  s.lambdas.resize(n);
  for (int a = 0; a < n; ++a) {
    const Eigen::Index c = order[static_cast<std::size_t>(a)];
    s.lambdas[a] = es.eigenvalues()[c];
    s.vectors.emplace_back(es.eigenvectors().col(c));
  }
  finalize_residuals(T, s);
  return s;
}

class KrylovBasis {
 public:
  KrylovBasis(const TransferOperator& T, Eigen::Index capacity, std::mt19937_64& rng)
      : T_(T), V_(T.dim(), capacity), W_(T.dim(), capacity), rng_(rng) {}

  Eigen::Index size() const { return k_; }
  Eigen::Index capacity() const { return V_.cols(); }
  const Matrix& V() const { return V_; }
  const Matrix& W() const { return W_; }

  void append(Vector v) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const double before = v.norm();
      for (int pass = 0; pass < 2; ++pass) {
        if (k_ > 0) v -= V_.leftCols(k_) * (V_.leftCols(k_).transpose() * v);
      }
      const double after = v.norm();
      if (after > 1e-10 * std::max(before, 1e-300) && after > 0.0) {
        v /= after;
        V_.col(k_) = v;
        W_.col(k_) = T_.apply(v);
        ++k_;
        return;
      }
      v = random_vector();
    }
    throw ConvergenceError("Krylov basis could not be extended", std::numeric_limits<double>::infinity());
  }

  void compress(const Matrix& Y) {
    const Eigen::Index keep = Y.cols();
    Matrix nv = V_.leftCols(k_) * Y;
    Matrix nw = W_.leftCols(k_) * Y;
    V_.leftCols(keep) = nv;
    W_.leftCols(keep) = nw;
    k_ = keep;
  }

  Vector random_vector() {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(T_.dim());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng_);
    return v;
  }

 private:
  const TransferOperator& T_;
  Matrix V_;
  Matrix W_;
  Eigen::Index k_ = 0;
  std::mt19937_64& rng_;
};

SpectralApproximation krylov_eigs(const TransferOperator& T, int n, const EigensolverOptions& opts) {
  const Eigen::Index dim = T.dim();
  const Eigen::Index p = std::min<Eigen::Index>(dim, std::max<Eigen::Index>(2 * n + 20, 40));
  std::mt19937_64 rng(opts.seed);
  KrylovBasis basis(T, p, rng);
  basis.append(basis.random_vector());

  double best = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    while (basis.size() < p) basis.append(basis.W().col(basis.size() - 1));

    const Eigen::Index k = basis.size();
    Matrix H = basis.V().leftCols(k).transpose() * basis.W().leftCols(k);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const auto order = magnitude_order(es.eigenvalues());

    Matrix Y(k, k);
    Vector theta(k);
    for (Eigen::Index c = 0; c < k; ++c) {
      Y.col(c) = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
      theta[c] = es.eigenvalues()[order[static_cast<std::size_t>(c)]];
    }
    const double scale = std::max(std::abs(theta[0]), std::numeric_limits<double>::min());
    const Matrix X = basis.V().leftCols(k) * Y.leftCols(n);
    const Matrix TX = basis.W().leftCols(k) * Y.leftCols(n);
    int first_bad = -1;
    double worst = 0.0;
    for (int a = 0; a < n; ++a) {
      const double r = (TX.col(a) - theta[a] * X.col(a)).norm();
      worst = std::max(worst, r);
      if (first_bad < 0 && r > opts.tol * scale) first_bad = a;
    }
    best = std::min(best, worst / scale);

    if (first_bad < 0 || k == dim) {
      SpectralApproximation s;
      s.n = n;
      s.lambdas = theta.head(n);
      for (int a = 0; a < n; ++a) s.vectors.emplace_back(X.col(a).normalized());
      finalize_residuals(T, s);
      if (s.residuals.maxCoeff() <= std::max(opts.tol * scale, 1e3 * std::numeric_limits<double>::epsilon() * scale))
        return s;
      if (k == dim)
        throw ConvergenceError("Krylov eigensolver lost accuracy on a full basis", s.residuals.maxCoeff() / scale);
      first_bad = 0;
    }

    const Eigen::Index keep = std::min<Eigen::Index>(p - 1, n + (p - n) / 2);
    Vector next = TX.col(first_bad) - theta[first_bad] * X.col(first_bad);
    basis.compress(Y.leftCols(keep));
    basis.append(std::move(next));
  }
  throw ConvergenceError("Krylov eigensolver did not converge; best relative residual " + std::to_string(best), best);
}

}  // namespace

SpectralApproximation dominant_eigs(const TransferOperator& T, int n, const EigensolverOptions& opts) {
  if (T.is_open()) throw ValidationError("dominant_eigs: operator must be closed");
  if (n < 1 || static_cast<Eigen::Index>(n) > T.dim())
    throw DimensionError("dominant_eigs: n must lie in [1, D^2], got " + std::to_string(n));
  // Lanczos wins once only a small fraction of the spectrum is requested.
  const bool few = 6 * static_cast<Eigen::Index>(n) < T.dim();
  if (!opts.force_krylov && !opts.force_dense && T.dim() <= opts.dense_limit && !few) return dense_eigs(T, n);
  if (opts.force_dense && T.dim() <= opts.dense_limit) return dense_eigs(T, n);
  return krylov_eigs(T, n, opts);
}

double truncated_power_weight(double lambda, long long s) {
  if (s == 0) return 1.0;
  if (lambda == 0.0) return 0.0;
  const double log_mag = static_cast<double>(s) * std::log(std::abs(lambda));
  if (log_mag < std::log(std::numeric_limits<double>::min())) return 0.0;
  const double mag = std::exp(log_mag);
  return (lambda < 0.0 && (s % 2 != 0)) ? -mag : mag;
}

Vector truncated_power_weights(const SpectralApproximation& spec, long long s) {
  Vector w(spec.n);
  for (int a = 0; a < spec.n; ++a) w[a] = truncated_power_weight(spec.lambdas[a], s);
  return w;
}

double spectral_trace(const SpectralApproximation& spec, long long s) { return truncated_power_weights(spec, s).sum(); }

}  // namespace pbcmps
