#pragma once

#include <optional>
#include <vector>

#include "pbcmps/mps_tensor.hpp"

namespace pbcmps {

enum class TransferKind {
  plain,             ///< T = sum_i A_i (x) A_i
  vacant,            ///< T_A: ket tensor removed, (i, a, b) left open
  dressed,           ///< T_O = sum_{ik} O_{ki} A_i (x) A_k
  hamiltonian,       ///< two-site block with the bond term inserted
  hamiltonian_left,  ///< two-site block, first ket tensor removed
  hamiltonian_right  ///< two-site block, second ket tensor removed
};

const char* to_string(TransferKind kind);

/**
  Matrix-free transfer operator on the D^2-dimensional virtual space.

  A D^2-vector v is read as the D x D matrix V with V(a, a') = v[a + D a'],
  rows carrying the ket bond index and columns the bra index. Under this
  convention the plain transfer operator acts as V -> sum_i A_i V A_i^T.

  Closed kinds (plain, dressed, hamiltonian) support apply/sandwich/dense.
  Open kinds return the derivative of <w|K|u> with respect to the vacant ket
  tensor through open_sandwich.

  The Hamiltonian blocks assume a real symmetric, reflection-symmetric bond
  term; the models module guarantees both.
*/
class TransferOperator {
 public:
  static TransferOperator build(const MpsTensor& A, TransferKind kind, const std::optional<Matrix>& op = std::nullopt);
  static TransferOperator plain(const MpsTensor& A) { return build(A, TransferKind::plain); }
  static TransferOperator vacant(const MpsTensor& A) { return build(A, TransferKind::vacant); }
  static TransferOperator dressed(const MpsTensor& A, const Matrix& op) { return build(A, TransferKind::dressed, op); }
  static TransferOperator hamiltonian(const MpsTensor& A, const Matrix& h,
                                      TransferKind kind = TransferKind::hamiltonian) {
    return build(A, kind, h);
  }

  TransferKind kind() const noexcept { return kind_; }
  bool is_open() const noexcept;
  int phys_dim() const noexcept { return d_; }
  int bond_dim() const noexcept { return D_; }
  Eigen::Index dim() const noexcept { return static_cast<Eigen::Index>(D_) * D_; }

  Vector apply(const Vector& v) const;
  /// In-place friendly matrix form of apply.
  Matrix apply(const Matrix& V) const;
  double sandwich(const Vector& w, const Vector& u) const;
  SlotTensor open_sandwich(const Vector& w, const Vector& u) const;

  /// Dense D^2 x D^2 materialization, closed kinds only, D^2 <= 4096.
  Matrix dense() const;

  static constexpr Eigen::Index kDenseLimit = 4096;

 private:
  TransferOperator(const MpsTensor& A, TransferKind kind);

  void require_closed(const char* what) const;
  void require_open(const char* what) const;

  TransferKind kind_;
  int d_;
  int D_;
  std::vector<Matrix> A_;
  Matrix op_;
  // Hamiltonian kinds: P_[i*d+j] = A_i A_j and G_[i*d+j] = sum_kl h(kl, ij) A_k A_l.
  std::vector<Matrix> P_;
  std::vector<Matrix> G_;
};

inline Eigen::Map<const Matrix> as_matrix(const Vector& v, int D) { return {v.data(), D, D}; }
inline Eigen::Map<Matrix> as_matrix(Vector& v, int D) { return {v.data(), D, D}; }
inline Vector as_vector(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }

}  // namespace pbcmps
