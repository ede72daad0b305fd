#include "pbcmps/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "pbcmps/errors.hpp"

namespace pbcmps {

RingState::RingState(const MpsTensor& A, long long N, int n, const EigensolverOptions& eig)
    : N_(N), T_(TransferOperator::plain(A)) {
  if (N < 2) throw ValidationError("chain length N must be at least 2");
  spec_ = dominant_eigs(T_, n, eig);
  const double lambda1 = spec_.lambdas[0];
  A_ = normalize(A, lambda1);
  spec_.lambdas /= lambda1;
  spec_.residuals /= lambda1;
  T_ = TransferOperator::plain(A_);
  norm_ = spectral_trace(spec_, N);
  if (!(norm_ > 0.0)) throw NonPhysicalStateError("norm <I> is not positive");
}

double RingState::expectation(const Matrix& O) const {
  const TransferOperator TO = TransferOperator::dressed(A_, O);
  const Vector w = truncated_power_weights(spec_, N_ - 1);
  double s = 0.0;
  for (int a = 0; a < spec_.n; ++a) {
    const Vector& v = spec_.vectors[static_cast<std::size_t>(a)];
    s += w[a] * TO.sandwich(v, v);
  }
  return s / norm_;
}

double RingState::arc_pair(const Matrix& P, const Matrix& Q, long long short_arc, long long long_arc, int m) const {
  // Tr[T_P T^short T_Q T^long]
  const TransferOperator TP = TransferOperator::dressed(A_, P);
  const TransferOperator TQ = TransferOperator::dressed(A_, Q);
  const int n = spec_.n;
  const Vector wl = truncated_power_weights(spec_, long_arc);
  double s = 0.0;
  if (short_arc < m) {
    for (int a = 0; a < n; ++a) {
      if (wl[a] == 0.0) continue;
      const Vector& v = spec_.vectors[static_cast<std::size_t>(a)];
      Vector u = TQ.apply(v);
      for (long long t = 0; t < short_arc; ++t) u = T_.apply(u);
      s += wl[a] * TP.sandwich(v, u);
    }
    return s;
  }
  const Vector ws = truncated_power_weights(spec_, short_arc);
  Matrix basis(T_.dim(), n);
  for (int a = 0; a < n; ++a) basis.col(a) = spec_.vectors[static_cast<std::size_t>(a)];
  Matrix PV(T_.dim(), n);
  Matrix QV(T_.dim(), n);
  for (int a = 0; a < n; ++a) {
    PV.col(a) = TP.apply(Vector(basis.col(a)));
    QV.col(a) = TQ.apply(Vector(basis.col(a)));
  }
  const Matrix MP = basis.transpose() * PV;  // <a|T_P|b>
  const Matrix MQ = basis.transpose() * QV;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) s += wl[a] * ws[b] * MP(a, b) * MQ(b, a);
  return s;
}

double RingState::joint(const Matrix& first, const Matrix& second, long long dr, int m) const {
  if (dr < 1 || dr >= N_) throw ValidationError("separation must lie in [1, N-1]");
  const long long left = dr - 1;
  const long long right = N_ - dr - 1;
  // Tr[T_1 T^left T_2 T^right] = Tr[T_2 T^right T_1 T^left]
  const double t = left <= right ? arc_pair(first, second, left, right, m) : arc_pair(second, first, right, left, m);
  return t / norm_;
}

double RingState::connected(const Matrix& first, const Matrix& second, long long dr, int m) const {
  return joint(first, second, dr, m) - expectation(first) * expectation(second);
}

double local_expectation(const MpsTensor& A, const Matrix& O, long long N, int n) {
  if (O.rows() != A.phys_dim() || O.cols() != A.phys_dim()) throw DimensionError("operator must be d x d");
  return RingState(A, N, n).expectation(O);
}

SublatticeExpectation local_expectation(const MpsTensor& A, const TwoSiteHamiltonian& model, const Matrix& O,
                                        long long N, int n) {
  const RingState state(A, N, n);
  return {state.expectation(unrotate_observable(model, O, SiteParity::even)),
          state.expectation(unrotate_observable(model, O, SiteParity::odd))};
}

double correlation_function(const RingState& state, const TwoSiteHamiltonian& model, const Matrix& O, long long dr,
                            int m) {
  const Matrix second = unrotate_observable(model, O, dr % 2 == 0 ? SiteParity::even : SiteParity::odd);
  return state.connected(O, second, dr, m);
}

double correlation_function(const MpsTensor& A, const TwoSiteHamiltonian& model, const Matrix& O, long long N,
                            long long dr, int m, int n) {
  if (dr < 1 || 2 * dr > N) throw ValidationError("separation must lie in [1, N/2]");
  return correlation_function(RingState(A, N, n), model, O, dr, m);
}

double half_chain_correlator(const MpsTensor& A, const TwoSiteHamiltonian& model, const Matrix& O, long long N, int m,
                             int n) {
  if (N % 2 != 0) throw ValidationError("half-chain correlator requires an even ring length");
  return correlation_function(A, model, O, N, N / 2, m, n);
}

CorrelationProfile correlation_profile(const MpsTensor& A, const TwoSiteHamiltonian& model, const std::string& label,
                                       const Matrix& O, long long N, int m, int n) {
  const RingState state(A, N, n);
  CorrelationProfile p;
  p.label = label;
  p.model = model_string(model);
  p.N = N;
  p.D = A.bond_dim();
  p.m = m;
  p.n = n;
  for (long long dr = 1; 2 * dr <= N; ++dr) {
    p.dr.push_back(dr);
    p.values.push_back(correlation_function(state, model, O, dr, m));
  }
  return p;
}

void write_profile_csv(const std::filesystem::path& file, const CorrelationProfile& p) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "# model=" << p.model << " label=" << p.label << " N=" << p.N << " D=" << p.D << " m=" << p.m
      << " n=" << p.n << "\n";
  out << "dr,gamma,abs_gamma\n";
  char buf[96];
  for (std::size_t i = 0; i < p.dr.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", p.dr[i], p.values[i], std::abs(p.values[i]));
    out << buf;
  }
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  PowerLawFit fit;
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [D, delta] : points) {
    if (!(delta > 0.0) || !(D > 0.0)) {
      fit.warnings.push_back("skipped point D=" + std::to_string(D) + " with nonpositive value");
      continue;
    }
    x.push_back(std::log(D));
    y.push_back(std::log(delta));
  }
  if (x.size() < 3) throw ValidationError("power-law fit needs at least three positive points");
  const double k = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("power-law fit needs at least two distinct D values");
  const double slope = sxy / sxx;
  fit.mu = -slope;
  fit.intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + slope * x[i]);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / k);
  fit.D_min = std::exp(*std::min_element(x.begin(), x.end()));
  fit.D_max = std::exp(*std::max_element(x.begin(), x.end()));
  fit.points_used = static_cast<int>(x.size());
  return fit;
}

}  // namespace pbcmps
