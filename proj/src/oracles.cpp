#include "pbcmps/oracles.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "pbcmps/errors.hpp"

namespace pbcmps {
namespace {

long long checked_dimension(int d, int N) {
  if (N < 2) throw ValidationError("ED: ring needs at least two sites");
  long long dim = 1;
  for (int s = 0; s < N; ++s) {
    dim *= d;
    if (dim > (1LL << 20)) throw CostGuardError("ED: Hilbert space exceeds 2^20 states");
  }
  return dim;
}

std::vector<long long> place_values(int d, int N) {
  std::vector<long long> pw(static_cast<std::size_t>(N));
  long long p = 1;
  for (int s = N - 1; s >= 0; --s) {
    pw[static_cast<std::size_t>(s)] = p;
    p *= d;
  }
  return pw;
}

Vector apply_site(const Matrix& O, int d, int N, int site, const Vector& psi) {
  const auto pw = place_values(d, N);
  const long long p = pw[static_cast<std::size_t>(site)];
  Vector out = Vector::Zero(psi.size());
  for (long long idx = 0; idx < psi.size(); ++idx) {
    const int i = static_cast<int>((idx / p) % d);
    const long long base = idx - i * p;
    for (int k = 0; k < d; ++k)
      if (O(k, i) != 0.0) out[base + k * p] += O(k, i) * psi[idx];
  }
  return out;
}

/// Lowest eigenpair by thick-restart Lanczos with full reorthogonalization.
EDResult lowest_eigenpair(const std::function<Vector(const Vector&)>& op, const Vector& start,
                          const std::function<void(Vector&)>& project) {
  const Eigen::Index dim = start.size();
  const Eigen::Index p = std::min<Eigen::Index>(dim, dim > (1 << 16) ? 24 : 40);
  const Eigen::Index keep = std::min<Eigen::Index>(p - 1, 8);
  Matrix V(dim, p);
  Matrix W(dim, p);
  Eigen::Index k = 0;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;

  // Returns false once the (projected) space is exhausted.
  auto append = [&](Vector v) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      if (project) project(v);
      const double before = v.norm();
      for (int pass = 0; pass < 2; ++pass)
        if (k > 0) v -= V.leftCols(k) * (V.leftCols(k).transpose() * v);
      const double after = v.norm();
      if (after > 1e-10 * before && after > 0.0) {
        V.col(k) = v / after;
        Vector w = op(V.col(k));
        if (project) project(w);
        W.col(k) = w;
        ++k;
        return true;
      }
      for (Eigen::Index i = 0; i < dim; ++i) v[i] = g(rng);
    }
    return false;
  };

  if (!append(start)) throw ValidationError("ED: start vector vanishes in the requested sector");
  double best = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 2000; ++restart) {
    bool exhausted = false;
    while (k < p && !exhausted) exhausted = !append(W.col(k - 1));
    Matrix H = V.leftCols(k).transpose() * W.leftCols(k);
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const Vector x = V.leftCols(k) * es.eigenvectors().col(0);
    const Vector r = W.leftCols(k) * es.eigenvectors().col(0) - es.eigenvalues()[0] * x;
    const double scale = std::max(1.0, std::abs(es.eigenvalues()[0]));
    best = std::min(best, r.norm());
    if (r.norm() <= 1e-11 * scale || k == dim || exhausted) {
      EDResult out;
      out.energy = es.eigenvalues()[0];
      out.state = x.normalized();
      out.next_level = k > 1 ? es.eigenvalues()[1] : std::numeric_limits<double>::infinity();
      out.degenerate = k > 1 && std::abs(out.next_level - out.energy) < 1e-8 * scale;
      Vector hx = op(out.state);
      if (project) project(hx);
      out.residual = (hx - out.energy * out.state).norm();
      return out;
    }
    const Matrix Y = es.eigenvectors().leftCols(keep);
    Matrix nv = V.leftCols(k) * Y;
    Matrix nw = W.leftCols(k) * Y;
    V.leftCols(keep) = nv;
    W.leftCols(keep) = nw;
    k = keep;
    if (!append(r)) throw ConvergenceError("ED: Krylov basis could not be extended", best);
  }
  throw ConvergenceError("ED: Lanczos did not converge", best);
}

// Dense ring objects use the row index alpha * D + alpha' (ket, bra).
struct DenseRing {
  int d;
  int D;
  std::vector<Matrix> A;
  Matrix T;

  explicit DenseRing(const MpsTensor& t) : d(t.phys_dim()), D(t.bond_dim()), A(t.matrices()) {
    T = dressed(Matrix::Identity(d, d));
  }

  Eigen::Index idx(int a, int ap) const { return static_cast<Eigen::Index>(a) * D + ap; }

  Matrix dressed(const Matrix& O) const {
    const Eigen::Index n = static_cast<Eigen::Index>(D) * D;
    Matrix M = Matrix::Zero(n, n);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        if (O(k, i) == 0.0) continue;
        for (int a = 0; a < D; ++a)
          for (int ap = 0; ap < D; ++ap)
            for (int b = 0; b < D; ++b)
              for (int bp = 0; bp < D; ++bp) M(idx(a, ap), idx(b, bp)) += O(k, i) * A[i](a, b) * A[k](ap, bp);
      }
    return M;
  }

  Matrix hamiltonian(const Matrix& h) const {
    const Eigen::Index n = static_cast<Eigen::Index>(D) * D;
    Matrix M = Matrix::Zero(n, n);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const Matrix ket = A[i] * A[j];
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) {
            const double hv = h(k * d + l, i * d + j);
            if (hv == 0.0) continue;
            const Matrix bra = A[k] * A[l];
            for (int a = 0; a < D; ++a)
              for (int ap = 0; ap < D; ++ap)
                for (int c = 0; c < D; ++c)
                  for (int cp = 0; cp < D; ++cp) M(idx(a, ap), idx(c, cp)) += hv * ket(a, c) * bra(ap, cp);
          }
      }
    return M;
  }

  // d/dA_i(a,b) of Tr[Z T] taken on the ket tensor.
  SlotTensor vacant_slot(const Matrix& Z) const {
    SlotTensor out(d, D);
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) {
          double s = 0.0;
          for (int ap = 0; ap < D; ++ap)
            for (int bp = 0; bp < D; ++bp) s += A[i](ap, bp) * Z(idx(b, bp), idx(a, ap));
          out.blocks[static_cast<std::size_t>(i)](a, b) = s;
        }
    return out;
  }

  // d/dA of Tr[Z H] on the first and on the second ket tensor of the bond.
  SlotTensor hamiltonian_slots(const Matrix& h, const Matrix& Z) const {
    SlotTensor out(d, D);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) {
            const double hv = h(k * d + l, i * d + j);
            if (hv == 0.0) continue;
            const Matrix bra = A[k] * A[l];
            Matrix& first = out.blocks[static_cast<std::size_t>(i)];
            Matrix& second = out.blocks[static_cast<std::size_t>(j)];
            for (int a = 0; a < D; ++a)
              for (int b = 0; b < D; ++b) {
                double s1 = 0.0;
                double s2 = 0.0;
                for (int c = 0; c < D; ++c)
                  for (int ap = 0; ap < D; ++ap)
                    for (int cp = 0; cp < D; ++cp) {
                      // first slot: alpha = a, beta = b, gamma = c
                      s1 += A[j](b, c) * bra(ap, cp) * Z(idx(c, cp), idx(a, ap));
                      // second slot: alpha = c, beta = a, gamma = b
                      s2 += A[i](c, a) * bra(ap, cp) * Z(idx(b, cp), idx(c, ap));
                    }
                first(a, b) += hv * s1;
                second(a, b) += hv * s2;
              }
          }
    return out;
  }
};

std::vector<Matrix> powers(const Matrix& T, int up_to) {
  std::vector<Matrix> p;
  p.reserve(static_cast<std::size_t>(up_to) + 1);
  p.push_back(Matrix::Identity(T.rows(), T.cols()));
  for (int s = 1; s <= up_to; ++s) p.push_back(p.back() * T);
  return p;
}

void guard_ring(const MpsTensor& A, int N) {
  if (A.bond_dim() > 8 || N > 24) throw CostGuardError("exact ring contraction limited to D <= 8 and N <= 24");
  if (N < 3) throw ValidationError("exact ring contraction needs N >= 3");
}

}  // namespace

Vector apply_ring_hamiltonian(const Matrix& h, int d, int N, const Vector& psi) {
  const long long dim = checked_dimension(d, N);
  if (psi.size() != dim) throw DimensionError("apply_ring_hamiltonian: state has wrong dimension");
  const auto pw = place_values(d, N);
  std::vector<std::vector<std::pair<int, double>>> columns(static_cast<std::size_t>(d * d));
  for (int ij = 0; ij < d * d; ++ij)
    for (int kl = 0; kl < d * d; ++kl)
      if (h(kl, ij) != 0.0) columns[static_cast<std::size_t>(ij)].emplace_back(kl, h(kl, ij));

  Vector out = Vector::Zero(dim);
  for (int s = 0; s < N; ++s) {
    const long long ps = pw[static_cast<std::size_t>(s)];
    const long long pt = pw[static_cast<std::size_t>((s + 1) % N)];
    for (long long idx = 0; idx < dim; ++idx) {
      const double amp = psi[idx];
      if (amp == 0.0) continue;
      const int i = static_cast<int>((idx / ps) % d);
      const int j = static_cast<int>((idx / pt) % d);
      const long long base = idx - i * ps - j * pt;
      for (const auto& [kl, value] : columns[static_cast<std::size_t>(i * d + j)])
        out[base + (kl / d) * ps + (kl % d) * pt] += value * amp;
    }
  }
  return out;
}

EDResult exact_diagonalize(const TwoSiteHamiltonian& model, int N, std::uint64_t seed) {
  const long long dim = checked_dimension(model.d, N);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vector start(dim);
  for (long long i = 0; i < dim; ++i) start[i] = g(rng);
  return exact_diagonalize(model.h, model.d, N, start);
}

EDResult exact_diagonalize(const Matrix& h, int d, int N, const Vector& start,
                           const std::function<void(Vector&)>& project) {
  checked_dimension(d, N);
  auto op = [&](const Vector& v) { return apply_ring_hamiltonian(h, d, N, v); };
  EDResult r = lowest_eigenpair(op, start, project);
  r.N = N;
  return r;
}

double ed_local(const TwoSiteHamiltonian& model, const EDResult& ed, const Matrix& O, int site) {
  const Matrix op = unrotate_observable(model, O, site % 2 == 0 ? SiteParity::even : SiteParity::odd);
  return ed.state.dot(apply_site(op, model.d, ed.N, site, ed.state));
}

double ed_correlator(const TwoSiteHamiltonian& model, const EDResult& ed, const Matrix& O, int dr) {
  if (dr < 1 || dr >= ed.N) throw ValidationError("ed_correlator: separation out of range");
  const Matrix second = unrotate_observable(model, O, dr % 2 == 0 ? SiteParity::even : SiteParity::odd);
  const Vector right = apply_site(second, model.d, ed.N, dr, ed.state);
  const Vector both = apply_site(O, model.d, ed.N, 0, right);
  return ed.state.dot(both) - ed_local(model, ed, O, 0) * ed_local(model, ed, O, dr);
}

ExactRingResult exact_ring_contraction(const MpsTensor& A, const Matrix& h, int N) {
  guard_ring(A, N);
  const DenseRing ring(A);
  const auto Tp = powers(ring.T, N);
  const Matrix H = ring.hamiltonian(h);

  ExactRingResult out;
  out.norm = Tp[static_cast<std::size_t>(N)].trace();
  out.energy_density = (H * Tp[static_cast<std::size_t>(N - 2)]).trace() / out.norm;
  out.neff = ring.vacant_slot(Tp[static_cast<std::size_t>(N - 1)]);
  out.heff = ring.hamiltonian_slots(h, Tp[static_cast<std::size_t>(N - 2)]);
  for (int s = 0; s <= N - 3; ++s) {
    const Matrix Z = Tp[static_cast<std::size_t>(N - 3 - s)] * H * Tp[static_cast<std::size_t>(s)];
    out.heff += ring.vacant_slot(Z);
  }
  return out;
}

ExactRingResult exact_ring_contraction(const MpsTensor& A, const TwoSiteHamiltonian& model, int N) {
  ExactRingResult out = exact_ring_contraction(A, model.h, N);
  const std::pair<const char*, Matrix> ops[] = {{"ZZ", spin::z_operator(model.d)}, {"XX", spin::x_operator(model.d)}};
  for (const auto& [label, O] : ops) {
    std::vector<double> g(static_cast<std::size_t>(N), 0.0);
    for (int dr = 1; dr < N; ++dr) {
      const Matrix second = unrotate_observable(model, O, dr % 2 == 0 ? SiteParity::even : SiteParity::odd);
      g[static_cast<std::size_t>(dr)] = exact_ring_correlator(A, O, second, N, dr);
    }
    out.gamma[label] = std::move(g);
  }
  return out;
}

double exact_ring_correlator(const MpsTensor& A, const Matrix& first, const Matrix& second, int N, int dr) {
  guard_ring(A, N);
  if (dr < 1 || dr >= N) throw ValidationError("exact_ring_correlator: separation out of range");
  const DenseRing ring(A);
  const auto Tp = powers(ring.T, N);
  const double norm = Tp[static_cast<std::size_t>(N)].trace();
  const Matrix T1 = ring.dressed(first);
  const Matrix T2 = ring.dressed(second);
  const double e1 = (T1 * Tp[static_cast<std::size_t>(N - 1)]).trace() / norm;
  const double e2 = (T2 * Tp[static_cast<std::size_t>(N - 1)]).trace() / norm;
  const double joint =
      (T1 * Tp[static_cast<std::size_t>(dr - 1)] * T2 * Tp[static_cast<std::size_t>(N - dr - 1)]).trace() / norm;
  return joint - e1 * e2;
}

double exact_ring_energy(const MpsTensor& A, const Matrix& h, int N) {
  guard_ring(A, N);
  const DenseRing ring(A);
  const auto Tp = powers(ring.T, N);
  return (ring.hamiltonian(h) * Tp[static_cast<std::size_t>(N - 2)]).trace() / Tp[static_cast<std::size_t>(N)].trace();
}

FreeFermionSolution ising_free_fermion(int N, double B) {
  if (N < 2 || N % 2 != 0) throw ValidationError("free-fermion solution requires an even ring length");
  const double pi = std::numbers::pi;
  auto dispersion = [B](double k) { return std::sqrt(1.0 + B * B - 2.0 * B * std::cos(k)); };

  FreeFermionSolution out;
  out.N = N;
  out.B = B;
  // Even fermion parity: antiperiodic momenta k = pi (2j + 1) / N.
  double even = 0.0;
  for (int j = 0; j < N; ++j) even -= dispersion(pi * (2 * j + 1) / N);
  // Odd parity: periodic momenta; the k = 0 mode enters with its signed energy.
  double odd = -(1.0 - B);
  for (int j = 1; j < N; ++j) odd -= dispersion(2.0 * pi * j / N);
  out.energy_even = even;
  out.energy_odd = odd;
  out.energy = std::min(even, odd);
  out.sector = even <= odd ? "antiperiodic" : "periodic";

  // G(r) = <B_x A_{x+r}> in the even-parity ground state.
  auto G = [&](int r) {
    double s = 0.0;
    for (int j = 0; j < N; ++j) {
      const double k = pi * (2 * j + 1) / N;
      s += (std::cos(k * (r - 1)) - B * std::cos(k * r)) / dispersion(k);
    }
    return s / N;
  };
  const int half = N / 2;
  std::vector<double> g(static_cast<std::size_t>(2 * half + 1));
  for (int r = -half; r <= half; ++r) g[static_cast<std::size_t>(r + half)] = G(r);
  auto Gat = [&](int r) { return g[static_cast<std::size_t>(r + half)]; };

  out.gamma_zz.assign(static_cast<std::size_t>(half + 1), 0.0);
  out.gamma_xx.assign(static_cast<std::size_t>(half + 1), 0.0);
  for (int r = 1; r <= half; ++r) {
    Matrix M(r, r);
    for (int p = 0; p < r; ++p)
      for (int q = 0; q < r; ++q) M(p, q) = Gat(q - p + 1);
    out.gamma_zz[static_cast<std::size_t>(r)] = M.determinant();
    out.gamma_xx[static_cast<std::size_t>(r)] = -Gat(r) * Gat(-r);
  }
  return out;
}

std::optional<std::filesystem::path> oracle_cache_dir() {
  if (const char* dir = std::getenv("PBCMPS_CACHE_DIR"); dir != nullptr && *dir != '\0') return std::filesystem::path(dir);
  return std::nullopt;
}

std::optional<double> reference_ground_energy(const TwoSiteHamiltonian& model, int N) {
  std::ostringstream key;
  key << model_string(model) << "_N" << N;
  std::string name = key.str();
  for (char& c : name)
    if (c == ':' || c == '=') c = '_';

  const auto cache = oracle_cache_dir();
  const auto cache_file = cache ? std::optional(*cache / (name + ".json")) : std::nullopt;
  if (cache_file && std::filesystem::exists(*cache_file)) {
    std::ifstream in(*cache_file);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.contains("energy")) return j["energy"].get<double>();
  }

  std::optional<double> energy;
  std::string source;
  if (model.name == "ising" && N % 2 == 0) {
    energy = ising_free_fermion(N, model.field.value_or(0.0)).energy;
    source = "free-fermion";
  } else if (std::pow(static_cast<double>(model.d), N) <= static_cast<double>(1 << 20)) {
    energy = exact_diagonalize(model, N).energy;
    source = "ed";
  } else if (model.exact_reference.rfind("reference:", 0) == 0) {
    energy = N * std::stod(model.exact_reference.substr(10));
    source = "reference";
  }
  if (energy && cache_file) {
    std::filesystem::create_directories(*cache);
    std::ofstream out(*cache_file);
    out << nlohmann::json{{"model", model_string(model)}, {"N", N}, {"energy", *energy}, {"source", source}}.dump(2)
        << "\n";
  }
  return energy;
}

}  // namespace pbcmps
