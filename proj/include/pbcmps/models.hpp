#pragma once

#include <optional>
#include <string>

#include "pbcmps/mps_tensor.hpp"

namespace pbcmps {

enum class SublatticeRotation { none, pauli_y_half, exp_i_pi_y_spin1 };

const char* to_string(SublatticeRotation r);

/// Nearest-neighbour bond term H_{s,s+1} of a translationally invariant ring.
/// Basis index of |i>|j> is i*d + j.
struct TwoSiteHamiltonian {
  int d = 2;
  Matrix h;
  std::string name;
  SublatticeRotation rotation = SublatticeRotation::none;
  /// Unitary applied on every second site (identity when rotation == none).
  Matrix rotation_unitary;
  /// Transverse field for the Ising model, used to look up oracles.
  std::optional<double> field;
  /// Oracle tag: "free-fermion", "ed", or "reference:<value>".
  std::string exact_reference;
};

TwoSiteHamiltonian ising(double B);
TwoSiteHamiltonian heisenberg_half_rotated();
TwoSiteHamiltonian heisenberg_one_rotated();

/// The two-site term of the model before the sublattice rotation.
Matrix unrotated_bond(const TwoSiteHamiltonian& model);

/// "ising:B=<float>", "heisenberg-half", "heisenberg-one". Throws ValidationError.
TwoSiteHamiltonian parse_model(const std::string& spec);
std::string model_string(const TwoSiteHamiltonian& model);

enum class SiteParity { even, odd };

/// Site operator of the original model expressed in the rotated frame:
/// O on even sites, U O U^T on odd sites.
Matrix unrotate_observable(const TwoSiteHamiltonian& model, const Matrix& O, SiteParity parity);

namespace spin {
Matrix pauli_x();
/// i * sigma_y, which is real.
Matrix pauli_iy();
Matrix pauli_z();
/// Spin-1 operators in the S_z eigenbasis (m = +1, 0, -1); S_y is returned
/// as the real matrix i * S_y.
Matrix spin1_x();
Matrix spin1_iy();
Matrix spin1_z();
/// exp(i pi S_y), real for spin 1.
Matrix spin1_pi_rotation_y();
/// Z for d = 2, S_z for d = 3.
Matrix z_operator(int d);
Matrix x_operator(int d);
Matrix swap(int d);
}  // namespace spin

}  // namespace pbcmps
