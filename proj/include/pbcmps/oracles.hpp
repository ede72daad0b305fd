#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pbcmps/models.hpp"
#include "pbcmps/mps_tensor.hpp"

namespace pbcmps {

/// Lowest eigenpair of a ring Hamiltonian built from nearest-neighbour terms.
struct EDResult {
  int N = 0;
  /// Total (extensive) ground-state energy.
  double energy = 0.0;
  Vector state;
  /// Second-lowest Ritz value from the final Krylov space.
  double next_level = 0.0;
  bool degenerate = false;
  double residual = 0.0;
};

/// Matrix-free application of sum_s h_{s,s+1} (wrap bond included) on d^N states.
/// Site 0 is the most significant digit of the basis index.
Vector apply_ring_hamiltonian(const Matrix& h, int d, int N, const Vector& psi);

/// Throws CostGuardError when d^N exceeds 2^20.
EDResult exact_diagonalize(const TwoSiteHamiltonian& model, int N, std::uint64_t seed = 7);
/// Same, starting from a given vector; project (if set) is applied after every
/// product so the search stays inside a symmetry sector.
EDResult exact_diagonalize(const Matrix& h, int d, int N, const Vector& start,
                           const std::function<void(Vector&)>& project = {});

/// <O_0 O'_dr> - <O_0><O'_dr> in the original (unrotated) frame, with O' the
/// sublattice-transformed operator at site dr.
double ed_correlator(const TwoSiteHamiltonian& model, const EDResult& ed, const Matrix& O, int dr);
double ed_local(const TwoSiteHamiltonian& model, const EDResult& ed, const Matrix& O, int site);

/// Every quantity of the ring MPS by brute-force dense contraction, no
/// spectral truncation. Independent index conventions from the main code.
struct ExactRingResult {
  double norm = 0.0;
  double energy_density = 0.0;
  SlotTensor heff;
  SlotTensor neff;
  /// label -> Gamma(dr) for dr = 0..N-1 (entry 0 unused and zero).
  std::map<std::string, std::vector<double>> gamma;
};

/// Throws CostGuardError unless D <= 8 and N <= 24.
ExactRingResult exact_ring_contraction(const MpsTensor& A, const TwoSiteHamiltonian& model, int N);
ExactRingResult exact_ring_contraction(const MpsTensor& A, const Matrix& h, int N);

/// Connected two-point function by dense contraction, first operator at site
/// 0 and second at site dr.
double exact_ring_correlator(const MpsTensor& A, const Matrix& first, const Matrix& second, int N, int dr);

/// Energy density by dense contraction, for finite-difference checks.
double exact_ring_energy(const MpsTensor& A, const Matrix& h, int N);

/// Ground state of H = -sum Z Z - B sum X on an even ring via Jordan-Wigner.
struct FreeFermionSolution {
  int N = 0;
  double B = 0.0;
  /// Total ground-state energy, minimum over both parity sectors.
  double energy = 0.0;
  double energy_even = 0.0;
  double energy_odd = 0.0;
  /// "antiperiodic" (even fermion parity) or "periodic" (odd parity).
  std::string sector;
  /// Connected correlators for dr = 0..N/2 in the even-parity ground state.
  std::vector<double> gamma_zz;
  std::vector<double> gamma_xx;
};

/// Throws ValidationError for odd N.
FreeFermionSolution ising_free_fermion(int N, double B);

/// Cache directory from PBCMPS_CACHE_DIR, if set.
std::optional<std::filesystem::path> oracle_cache_dir();

/// Ground-state energy (total) of a model on an N-ring, from the free-fermion
/// solution for Ising or ED otherwise; cached on disk when a cache directory
/// is configured. Returns nullopt when no oracle applies.
std::optional<double> reference_ground_energy(const TwoSiteHamiltonian& model, int N);

}  // namespace pbcmps
