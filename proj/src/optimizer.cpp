#include "pbcmps/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "pbcmps/errors.hpp"
#include "pbcmps/io.hpp"

namespace pbcmps {

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::gradient: return "gradient";
    case StopReason::energy: return "energy";
    case StopReason::line_search_failed: return "line-search-failed";
    case StopReason::max_iterations: return "max-iterations";
  }
  return "?";
}

const char* to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::file: return "file";
    case InitStrategy::continuation: return "continuation";
    case InitStrategy::perturbed_product: return "perturbed-product";
    case InitStrategy::random: return "random";
  }
  return "?";
}

InitStrategy parse_init_strategy(const std::string& s) {
  if (s == "file") return InitStrategy::file;
  if (s == "continuation") return InitStrategy::continuation;
  if (s == "perturbed-product") return InitStrategy::perturbed_product;
  if (s == "random") return InitStrategy::random;
  throw ValidationError("unknown init strategy '" + s + "'");
}

void OptimizeConfig::validate() const {
  if (!(gradient_tolerance > 0.0) || !(energy_tolerance > 0.0)) throw ValidationError("tolerances must be positive");
  if (!(0.0 < line_search.c1 && line_search.c1 < line_search.c2 && line_search.c2 < 1.0))
    throw ValidationError("line search constants must satisfy 0 < c1 < c2 < 1");
  if (max_iterations < 0 || restart_period < 0 || line_search.max_evaluations < 2)
    throw ValidationError("iteration limits must be positive");
  if (!(precondition_floor > 0.0)) throw ValidationError("precondition floor must be positive");
}

void ScanConfig::validate() const {
  if (!(k > 0.0 && k <= 1.0)) throw ValidationError("scan slope k must lie in (0, 1]");
  if (!(plateau_tolerance > 0.0)) throw ValidationError("plateau tolerance must be positive");
  if (fixed_m && *fixed_m < 0) throw ValidationError("fixed m must be nonnegative");
}

namespace {

struct Evaluation {
  double f = std::numeric_limits<double>::infinity();
  Vector g;
  double lambda1 = 1.0;
  /// Dominant transfer eigenvector as a symmetric D x D matrix.
  Matrix env;
  bool ok = false;
};

class Objective {
 public:
  Objective(const TwoSiteHamiltonian& model, int D, long long N, int m, int n, const EigensolverOptions& eig)
      : model_(model), D_(D), N_(N), m_(m), n_(n), eig_(eig) {}

  Evaluation operator()(const Vector& x) const {
    Evaluation e;
    ParamVector p;
    p.values = x;
    const MpsTensor A = unpack(p, model_.d, D_);
    try {
      const GradientWorkspace ws(A, model_.h, N_, m_, n_, eig_);
      EnergyGradient eg = energy_gradient(ws);
      if (!std::isfinite(eg.value)) throw NumericalError("energy is not finite");
      e.f = eg.value;
      e.g = std::move(eg.gradient);
      e.lambda1 = eg.diagnostics.lambda1;
      const Matrix V = ws.spectrum().vectors.front().reshaped(D_, D_);
      e.env = 0.5 * (V + V.transpose());
      e.ok = true;
    } catch (const NonPhysicalStateError&) {
      // A trial point outside the physical region is simply rejected.
    }
    ++evaluations;
    return e;
  }

  MpsTensor tensor(const Vector& x) const {
    ParamVector p;
    p.values = x;
    return unpack(p, model_.d, D_);
  }

  mutable long long evaluations = 0;

 private:
  const TwoSiteHamiltonian& model_;
  int D_;
  long long N_;
  int m_;
  int n_;
  EigensolverOptions eig_;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), or NaN.
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

struct LineSearchOutcome {
  bool wolfe = false;
  double alpha = 0.0;
  Evaluation at;
  /// Upper bound on the decrease available along the line, |phi'(0)| times
  /// the smallest trial step with phi' >= 0 (infinite if none was seen).
  double attainable = std::numeric_limits<double>::infinity();
};

// Strong Wolfe search (bracketing + zoom). When no trial satisfies both
// conditions, the best sufficient-decrease trial (if any) is returned with
// wolfe = false.
LineSearchOutcome strong_wolfe_impl(const Objective& obj, double& bracket, const Vector& x, const Evaluation& e0, const Vector& dir,
                               double alpha0, const LineSearchConfig& cfg) {
  const double f0 = e0.f;
  const double dphi0 = e0.g.dot(dir);
  int evals = 0;
  LineSearchOutcome best;
  best.at.f = f0;

  // Near the rounding floor of the energy, sufficient decrease is judged by
  // plain non-increase; the curvature test still relies on the gradient.
  const double noise = 1e-14 * std::abs(f0);
  auto decrease = [&](double phi, double a) {
    return phi <= f0 + cfg.c1 * a * dphi0 || (phi <= f0 && cfg.c1 * a * std::abs(dphi0) <= noise);
  };

  auto trial = [&](double a, double& phi, double& dphi) {
    Evaluation e = obj(x + a * dir);
    ++evals;
    phi = e.f;
    dphi = e.ok ? e.g.dot(dir) : std::numeric_limits<double>::infinity();
    if (e.ok && dphi >= 0.0) bracket = std::min(bracket, a);
    if (e.ok && decrease(phi, a) && (phi < best.at.f || best.alpha == 0.0)) {
      best.alpha = a;
      best.at = e;
    }
    return e;
  };
  auto satisfied = [&](double phi, double dphi, double a) {
    return decrease(phi, a) && std::abs(dphi) <= -cfg.c2 * dphi0;
  };

  auto zoom = [&](double lo, double flo, double dlo, double hi, double fhi, double dhi) -> LineSearchOutcome {
    while (evals < cfg.max_evaluations) {
      double a = std::isfinite(fhi) && std::isfinite(dhi) ? cubic_minimizer(lo, flo, dlo, hi, fhi, dhi)
                                                          : std::numeric_limits<double>::quiet_NaN();
      const double width = hi - lo;
      const double lower = std::min(lo + 0.1 * width, hi - 0.1 * width);
      const double upper = std::max(lo + 0.1 * width, hi - 0.1 * width);
      if (!std::isfinite(a) || a < lower || a > upper) a = 0.5 * (lo + hi);
      double phi = 0.0;
      double dphi = 0.0;
      Evaluation e = trial(a, phi, dphi);
      if (!e.ok || !decrease(phi, a) || phi >= flo) {
        hi = a;
        fhi = phi;
        dhi = dphi;
      } else {
        if (satisfied(phi, dphi, a)) return {true, a, std::move(e)};
        if (dphi * (hi - lo) >= 0.0) {
          hi = lo;
          fhi = flo;
          dhi = dlo;
        }
        lo = a;
        flo = phi;
        dlo = dphi;
      }
      if (std::abs(hi - lo) <= 1e-16 * std::max(std::abs(lo), std::abs(hi))) break;
    }
    return best;
  };

  double prev = 0.0;
  double fprev = f0;
  double dprev = dphi0;
  double a = alpha0;
  for (int i = 0; evals < cfg.max_evaluations; ++i) {
    double phi = 0.0;
    double dphi = 0.0;
    Evaluation e = trial(a, phi, dphi);
    if (!e.ok || !decrease(phi, a) || (i > 0 && phi >= fprev))
      return zoom(prev, fprev, dprev, a, phi, dphi);
    if (std::abs(dphi) <= -cfg.c2 * dphi0) return {true, a, std::move(e)};
    if (dphi >= 0.0) return zoom(a, phi, dphi, prev, fprev, dprev);
    prev = a;
    fprev = phi;
    dprev = dphi;
    a *= 4.0;
  }
  return best;
}

LineSearchOutcome strong_wolfe(const Objective& obj, const Vector& x, const Evaluation& e0, const Vector& dir,
                               double alpha0, const LineSearchConfig& cfg) {
  double bracket = std::numeric_limits<double>::infinity();
  LineSearchOutcome r = strong_wolfe_impl(obj, bracket, x, e0, dir, alpha0, cfg);
  r.attainable = std::abs(e0.g.dot(dir)) * bracket;
  return r;
}

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Applies the inverse tangent metric: G -> L G L per physical index, with
// L = (|V| + floor)^-1 and G the symmetric matrix gradient.
Vector precondition_gradient(const Vector& g, const Matrix& env, int d, double floor) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(env);
  const Vector s = es.eigenvalues().cwiseAbs();
  const double top = s.maxCoeff();
  const Vector inv = (s / top).array().max(0.0).unaryExpr([&](double x) { return 1.0 / (x + floor); });
  const Matrix L = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  const int D = static_cast<int>(env.rows());
  ParamVector p;
  p.values = g;
  const MpsTensor G = unpack(p, d, D);
  std::vector<Matrix> out;
  for (int i = 0; i < d; ++i) {
    Matrix Gm = G[i];
    Gm.diagonal() *= 2.0;
    Gm *= 0.5;
    const Matrix P = L * Gm * L;
    out.push_back(0.5 * (P + P.transpose()));
  }
  return pack(MpsTensor(out)).values;
}

}  // namespace

RunResult minimize(const MpsTensor& A0, const TwoSiteHamiltonian& model, long long N, int m, int n,
                   const OptimizeConfig& cfg) {
  cfg.validate();
  if (A0.phys_dim() != model.d) throw DimensionError("initial tensor does not match the model's physical dimension");
  const auto start = std::chrono::steady_clock::now();
  const int D = A0.bond_dim();
  const Objective obj(model, D, N, m, n, cfg.eig);

  Vector x = pack(A0).values;
  const int period = cfg.restart_period > 0 ? cfg.restart_period : static_cast<int>(x.size());
  Evaluation cur = obj(x);
  if (!cur.ok) throw NonPhysicalStateError("initial tensor has no positive norm");

  // The energy is scale invariant; keep the iterate at unit dominant eigenvalue.
  auto rescale = [&]() {
    const double c = std::sqrt(cur.lambda1);
    x /= c;
    cur.g *= c;
    cur.lambda1 = 1.0;
  };
  rescale();

  RunResult out;
  out.model = model_string(model);
  out.N = N;
  out.m = m;
  out.n = n;
  out.reason = StopReason::max_iterations;
  out.energy_history.push_back(cur.f);

  auto search_gradient = [&](const Evaluation& e) {
    return cfg.precondition ? precondition_gradient(e.g, e.env, model.d, cfg.precondition_floor) : e.g;
  };
  Vector y = search_gradient(cur);

  std::deque<double> history{cur.f};
  Vector dir = -y;
  bool steepest = true;
  double last_alpha = 0.0;
  double last_slope = 0.0;
  int it = 0;

  auto finish = [&]() {
    out.tensor = obj.tensor(x);
    out.energy = cur.f;
    out.gradient_norm = inf_norm(cur.g);
    out.iterations = it;
    out.converged = out.reason == StopReason::gradient || out.reason == StopReason::energy;
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  };

  for (; it < cfg.max_iterations; ++it) {
    if (inf_norm(cur.g) <= cfg.gradient_tolerance) {
      out.reason = StopReason::gradient;
      return finish();
    }
    if (static_cast<int>(history.size()) > period) {
      const double old = history.front();
      if (std::abs(old - cur.f) <= cfg.energy_tolerance * std::abs(cur.f)) {
        out.reason = StopReason::energy;
        return finish();
      }
    }

    double slope = cur.g.dot(dir);
    if (!(slope < 0.0)) {
      dir = -y;
      steepest = true;
      slope = cur.g.dot(dir);
    }
    double alpha0 = last_alpha > 0.0 ? last_alpha * last_slope / slope : 0.1 * x.norm() / dir.norm();
    alpha0 = std::min(alpha0, x.norm() / dir.norm());

    LineSearchOutcome ls = strong_wolfe(obj, x, cur, dir, alpha0, cfg.line_search);
    if (ls.alpha <= 0.0 && !steepest) {
      dir = -y;
      steepest = true;
      slope = cur.g.dot(dir);
      ls = strong_wolfe(obj, x, cur, dir, 0.1 * x.norm() / dir.norm(), cfg.line_search);
    }
    if (ls.alpha <= 0.0) {
      // No measurable decrease left along the steepest-descent line.
      out.reason = ls.attainable <= cfg.energy_tolerance * std::abs(cur.f) ? StopReason::energy
                                                                           : StopReason::line_search_failed;
      return finish();
    }

    x += ls.alpha * dir;
    const Vector g_old = cur.g;
    const Vector y_old = y;
    cur = std::move(ls.at);
    last_alpha = ls.alpha;
    last_slope = slope;

    const bool restart = !ls.wolfe || (it + 1) % period == 0;
    if (restart) {
      rescale();
      y = search_gradient(cur);
      dir = -y;
      steepest = true;
      last_alpha = 0.0;
    } else {
      y = search_gradient(cur);
      const double beta = std::max(0.0, cur.g.dot(y - y_old) / g_old.dot(y_old));
      dir = -y + beta * dir;
      steepest = beta == 0.0;
    }

    out.energy_history.push_back(cur.f);
    history.push_back(cur.f);
    if (static_cast<int>(history.size()) > period + 1) history.pop_front();

    if (cfg.checkpoint_every > 0 && (it + 1) % cfg.checkpoint_every == 0) {
      RunResult snapshot = out;
      snapshot.tensor = obj.tensor(x);
      snapshot.energy = cur.f;
      snapshot.gradient_norm = inf_norm(cur.g);
      snapshot.iterations = it + 1;
      snapshot.converged = false;
      write_run_artifacts(cfg.checkpoint_dir, snapshot, cfg.seed);
    }
  }
  return finish();
}

std::vector<std::pair<int, int>> scan_points(long long N, int D, const ScanConfig& scan) {
  scan.validate();
  const int m_max = static_cast<int>((N - 2) / 2);
  const int n_max = D * D;
  std::vector<std::pair<int, int>> pts;
  if (scan.fixed_m) {
    const int m = std::min(*scan.fixed_m, m_max);
    for (int n = 1; n <= n_max; ++n) pts.emplace_back(m, n);
    return pts;
  }
  const int step = std::max(1, static_cast<int>(std::lround(1.0 / scan.k)));
  for (int j = 1;; ++j) {
    int m = j * step;
    int n = std::max(1, static_cast<int>(std::lround(scan.k * m)));
    if (m >= m_max) {
      m = m_max;
      // Constant maximal m, walking towards larger n.
      for (; n <= n_max; ++n)
        if (pts.empty() || pts.back() != std::pair{m, n}) pts.emplace_back(m, n);
      break;
    }
    if (n > n_max) break;
    if (pts.empty() || pts.back() != std::pair{m, n}) pts.emplace_back(m, n);
  }
  return pts;
}

RunResult scan_mn(const MpsTensor& A0, const TwoSiteHamiltonian& model, long long N, const ScanConfig& scan,
                  const OptimizeConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const auto pts = scan_points(N, A0.bond_dim(), scan);
  std::vector<ScanPoint> trace;
  MpsTensor current = A0;
  std::optional<RunResult> previous;
  int total_iterations = 0;

  auto finalize = [&](RunResult r, bool plateau) {
    r.trace = trace;
    r.plateau_detected = plateau;
    r.iterations = total_iterations;
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  };

  for (const auto& [m, n] : pts) {
    RunResult r = minimize(current, model, N, m, n, cfg);
    total_iterations += r.iterations;
    trace.push_back({m, n, r.energy, r.gradient_norm, r.iterations, r.converged});
    // Points whose minimization stalled (typically n too small for the
    // truncated gradient to be accurate) cannot bound a plateau.
    if (previous && previous->converged && r.converged &&
        std::abs(r.energy - previous->energy) < scan.plateau_tolerance * std::abs(previous->energy))
      return finalize(*previous, true);
    current = r.tensor;
    previous = std::move(r);
  }
  // A single admissible point (D = 1) is trivially the plateau.
  return finalize(*previous, pts.size() == 1);
}

MpsTensor initialize(const TwoSiteHamiltonian& model, int D, const InitRequest& req) {
  if (D < 1) throw ValidationError("bond dimension must be positive");
  const int d = model.d;
  std::mt19937_64 rng(req.seed);
  std::normal_distribution<double> gauss;
  auto random_symmetric = [&](double amp) {
    Matrix S(D, D);
    for (int a = 0; a < D; ++a)
      for (int b = a; b < D; ++b) S(a, b) = S(b, a) = amp * gauss(rng);
    return S;
  };

  std::vector<Matrix> mats;
  switch (req.strategy) {
    case InitStrategy::file: {
      MpsTensor A = read_tensor(req.file);
      if (A.phys_dim() != d || A.bond_dim() != D)
        throw ValidationError("tensor file shape (d=" + std::to_string(A.phys_dim()) + ", D=" +
                              std::to_string(A.bond_dim()) + ") does not match the request");
      return A;
    }
    case InitStrategy::random:
      for (int i = 0; i < d; ++i) mats.push_back(random_symmetric(1.0));
      break;
    case InitStrategy::perturbed_product: {
      const double eps = 1e-2;
      mats.push_back(Matrix::Identity(D, D) + random_symmetric(eps));
      for (int i = 1; i < d; ++i) mats.push_back(random_symmetric(eps));
      break;
    }
    case InitStrategy::continuation: {
      if (!req.source) throw ValidationError("continuation requires a source tensor");
      const MpsTensor& src = *req.source;
      if (src.phys_dim() != d || src.bond_dim() > D)
        throw ValidationError("continuation source must have the same d and a bond dimension <= D");
      const int Ds = src.bond_dim();
      const double amp = 1e-3 * src.max_abs();
      for (int i = 0; i < d; ++i) {
        Matrix M = random_symmetric(amp);
        M.topLeftCorner(Ds, Ds) = src[i];
        mats.push_back(M);
      }
      break;
    }
  }
  return MpsTensor(mats);
}

std::vector<RunResult> continuation_chain(const TwoSiteHamiltonian& model, long long N, const std::vector<int>& Ds,
                                          const ScanConfig& scan, const OptimizeConfig& cfg, std::uint64_t seed) {
  std::vector<RunResult> out;
  for (int D : Ds) {
    InitRequest req;
    req.seed = seed + static_cast<std::uint64_t>(D);
    if (out.empty()) {
      req.strategy = InitStrategy::perturbed_product;
    } else {
      req.strategy = InitStrategy::continuation;
      req.source = out.back().tensor;
    }
    out.push_back(scan_mn(initialize(model, D, req), model, N, scan, cfg));
  }
  return out;
}

}  // namespace pbcmps
