#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace pbcmps {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/**
  Site tensor of a translationally invariant MPS on a ring.

  Holds one real symmetric D x D matrix per physical index. Symmetry is
  checked bit-exactly at construction and every mutation goes through a
  constructor, so an existing instance is always symmetric and finite.
*/
class MpsTensor {
 public:
  MpsTensor() = default;
  /// All-zero tensor.
  MpsTensor(int d, int D);
  /// Throws ValidationError unless every matrix is D x D, exactly symmetric
  /// and finite.
  explicit MpsTensor(std::vector<Matrix> matrices);

  int phys_dim() const noexcept { return d_; }
  int bond_dim() const noexcept { return D_; }
  const Matrix& operator[](int i) const { return mats_[static_cast<std::size_t>(i)]; }
  const std::vector<Matrix>& matrices() const noexcept { return mats_; }
  double entry(int i, int a, int b) const { return mats_[static_cast<std::size_t>(i)](a, b); }

  /// Entries in (i, a, b) row-major order.
  std::vector<double> flat() const;
  static MpsTensor from_flat(int d, int D, std::span<const double> values);

  MpsTensor scaled(double c) const;
  double max_abs() const;

  friend bool operator==(const MpsTensor& x, const MpsTensor& y);

 private:
  int d_ = 0;
  int D_ = 0;
  std::vector<Matrix> mats_;
};

/// Independent coordinates of an MpsTensor: the upper triangle (diagonal
/// included) of each A_i in row-major order, blocks ordered by i.
struct ParamVector {
  Vector values;

  std::ptrdiff_t size() const noexcept { return values.size(); }
};

std::size_t param_count(int d, int D);

ParamVector pack(const MpsTensor& A);
MpsTensor unpack(const ParamVector& v, int d, int D);

/**
  Open-slot tensor with the index structure of a site tensor (i, a, b) but
  no symmetry requirement. Derivatives of contracted networks with respect
  to one vacant ket tensor land here.
*/
struct SlotTensor {
  std::vector<Matrix> blocks;

  SlotTensor() = default;
  SlotTensor(int d, int D);

  int phys_dim() const noexcept { return static_cast<int>(blocks.size()); }
  int bond_dim() const noexcept { return blocks.empty() ? 0 : static_cast<int>(blocks.front().rows()); }

  SlotTensor& operator+=(const SlotTensor& other);
  SlotTensor& operator-=(const SlotTensor& other);
  SlotTensor& operator*=(double c);
  SlotTensor transposed_blocks() const;
  double max_abs() const;
  double frobenius() const;
};

SlotTensor operator+(SlotTensor x, const SlotTensor& y);
SlotTensor operator-(SlotTensor x, const SlotTensor& y);
SlotTensor operator*(double c, SlotTensor x);

/// Chain rule onto the packed coordinates: off-diagonal parameters collect
/// g(i,a,b) + g(i,b,a), diagonal ones g(i,a,a).
Vector pack_gradient(const SlotTensor& raw);

/// A'_i = X A_i X^T. Throws ValidationError unless X^T X = I within 1e-12.
MpsTensor gauge_transform(const MpsTensor& A, const Matrix& X);

/// A / sqrt(lambda1). Throws NonPhysicalStateError for lambda1 <= 0.
MpsTensor normalize(const MpsTensor& A, double lambda1);

}  // namespace pbcmps
