#include "pbcmps/models.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pbcmps/errors.hpp"

namespace pbcmps {

const char* to_string(SublatticeRotation r) {
  switch (r) {
    case SublatticeRotation::none: return "none";
    case SublatticeRotation::pauli_y_half: return "pauli-Y-half";
    case SublatticeRotation::exp_i_pi_y_spin1: return "exp-iPiY-spin1";
  }
  return "?";
}

namespace spin {

Matrix pauli_x() { return (Matrix(2, 2) << 0, 1, 1, 0).finished(); }
Matrix pauli_iy() { return (Matrix(2, 2) << 0, 1, -1, 0).finished(); }
Matrix pauli_z() { return (Matrix(2, 2) << 1, 0, 0, -1).finished(); }

Matrix spin1_x() {
  const double s = 1.0 / std::numbers::sqrt2;
  return (Matrix(3, 3) << 0, s, 0, s, 0, s, 0, s, 0).finished();
}

Matrix spin1_iy() {
  const double s = 1.0 / std::numbers::sqrt2;
  return (Matrix(3, 3) << 0, s, 0, -s, 0, s, 0, -s, 0).finished();
}

Matrix spin1_z() { return (Matrix(3, 3) << 1, 0, 0, 0, 0, 0, 0, 0, -1).finished(); }

Matrix spin1_pi_rotation_y() {
  const Matrix generator = std::numbers::pi * spin1_iy();
  return generator.exp();
}

Matrix z_operator(int d) {
  if (d == 2) return pauli_z();
  if (d == 3) return spin1_z();
  throw DimensionError("z_operator: only d = 2 and d = 3 are supported");
}

Matrix x_operator(int d) {
  if (d == 2) return pauli_x();
  if (d == 3) return spin1_x();
  throw DimensionError("x_operator: only d = 2 and d = 3 are supported");
}

Matrix swap(int d) {
  Matrix P = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) P(j * d + i, i * d + j) = 1.0;
  return P;
}

}  // namespace spin

namespace {

Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

Matrix symmetrized(const Matrix& h) { return 0.5 * (h + h.transpose()); }

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

TwoSiteHamiltonian ising(double B) {
  using namespace spin;
  const Matrix I = Matrix::Identity(2, 2);
  TwoSiteHamiltonian m;
  m.d = 2;
  // The site field is split evenly over the two bonds touching the site.
  m.h = -kron(pauli_z(), pauli_z()) - 0.5 * B * (kron(pauli_x(), I) + kron(I, pauli_x()));
  m.name = "ising";
  m.field = B;
  m.rotation = SublatticeRotation::none;
  m.rotation_unitary = I;
  m.exact_reference = "free-fermion";
  return m;
}

TwoSiteHamiltonian heisenberg_half_rotated() {
  using namespace spin;
  TwoSiteHamiltonian m;
  m.d = 2;
  // Y (x) Y = -(iY) (x) (iY)
  m.h = 0.5 * (-kron(pauli_x(), pauli_x()) - kron(pauli_iy(), pauli_iy()) - kron(pauli_z(), pauli_z()));
  m.name = "heisenberg-half";
  m.rotation = SublatticeRotation::pauli_y_half;
  m.rotation_unitary = pauli_iy();
  m.exact_reference = "ed";
  return m;
}

TwoSiteHamiltonian heisenberg_one_rotated() {
  using namespace spin;
  const Matrix M = spin1_pi_rotation_y();
  const auto rotate = [&](const Matrix& s) -> Matrix { return M * s * M.transpose(); };
  TwoSiteHamiltonian m;
  m.d = 3;
  // S_y (x) S_y = -(iS_y) (x) (iS_y)
  m.h = symmetrized(kron(spin1_x(), rotate(spin1_x())) - kron(spin1_iy(), rotate(spin1_iy())) +
                    kron(spin1_z(), rotate(spin1_z())));
  m.name = "heisenberg-one";
  m.rotation = SublatticeRotation::exp_i_pi_y_spin1;
  m.rotation_unitary = M;
  m.exact_reference = "reference:-1.401484039";
  return m;
}

Matrix unrotated_bond(const TwoSiteHamiltonian& model) {
  using namespace spin;
  switch (model.rotation) {
    case SublatticeRotation::none: return model.h;
    case SublatticeRotation::pauli_y_half:
      return 0.5 * (kron(pauli_x(), pauli_x()) - kron(pauli_iy(), pauli_iy()) + kron(pauli_z(), pauli_z()));
    case SublatticeRotation::exp_i_pi_y_spin1:
      return kron(spin1_x(), spin1_x()) - kron(spin1_iy(), spin1_iy()) + kron(spin1_z(), spin1_z());
  }
  return model.h;
}

TwoSiteHamiltonian parse_model(const std::string& spec) {
  if (spec == "heisenberg-half") return heisenberg_half_rotated();
  if (spec == "heisenberg-one") return heisenberg_one_rotated();
  const std::string prefix = "ising:B=";
  if (spec.rfind(prefix, 0) == 0) {
    const std::string value = spec.substr(prefix.size());
    try {
      std::size_t used = 0;
      const double B = std::stod(value, &used);
      if (used != value.size() || !std::isfinite(B)) throw std::invalid_argument("trailing characters");
      return ising(B);
    } catch (const std::exception&) {
      throw ValidationError("invalid Ising field in model string '" + spec + "'");
    }
  }
  throw ValidationError("unknown model '" + spec + "' (expected ising:B=<float>, heisenberg-half, heisenberg-one)");
}

std::string model_string(const TwoSiteHamiltonian& model) {
  if (model.name == "ising") return "ising:B=" + format_double(model.field.value_or(0.0));
  return model.name;
}

Matrix unrotate_observable(const TwoSiteHamiltonian& model, const Matrix& O, SiteParity parity) {
  if (O.rows() != model.d || O.cols() != model.d) throw DimensionError("unrotate_observable: operator must be d x d");
  if (parity == SiteParity::even || model.rotation == SublatticeRotation::none) return O;
  const Matrix& U = model.rotation_unitary;
  return U * O * U.transpose();
}

}  // namespace pbcmps
