#include "pbcmps/mps_tensor.hpp"

#include <cmath>
#include <string>

#include "pbcmps/errors.hpp"

namespace pbcmps {

MpsTensor::MpsTensor(int d, int D) : d_(d), D_(D) {
  if (d < 1 || D < 1) throw DimensionError("MpsTensor: d and D must be positive");
  mats_.assign(static_cast<std::size_t>(d), Matrix::Zero(D, D));
}

MpsTensor::MpsTensor(std::vector<Matrix> matrices) : mats_(std::move(matrices)) {
  if (mats_.empty()) throw DimensionError("MpsTensor: need at least one physical index");
  d_ = static_cast<int>(mats_.size());
  D_ = static_cast<int>(mats_.front().rows());
  if (D_ < 1) throw DimensionError("MpsTensor: empty bond dimension");
  for (const auto& m : mats_) {
    if (m.rows() != D_ || m.cols() != D_) throw DimensionError("MpsTensor: matrices must all be D x D");
    for (int a = 0; a < D_; ++a) {
      for (int b = 0; b < D_; ++b) {
        if (!std::isfinite(m(a, b))) throw ValidationError("MpsTensor: non-finite entry");
        if (m(a, b) != m(b, a)) throw ValidationError("MpsTensor: matrix is not exactly symmetric");
      }
    }
  }
}

std::vector<double> MpsTensor::flat() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(d_) * D_ * D_);
  for (const auto& m : mats_)
    for (int a = 0; a < D_; ++a)
      for (int b = 0; b < D_; ++b) out.push_back(m(a, b));
  return out;
}

MpsTensor MpsTensor::from_flat(int d, int D, std::span<const double> values) {
  if (d < 1 || D < 1) throw DimensionError("from_flat: d and D must be positive");
  if (values.size() != static_cast<std::size_t>(d) * D * D)
    throw DimensionError("from_flat: expected " + std::to_string(d * D * D) + " entries, got " +
                         std::to_string(values.size()));
  std::vector<Matrix> mats(static_cast<std::size_t>(d), Matrix(D, D));
  std::size_t k = 0;
  for (auto& m : mats)
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) m(a, b) = values[k++];
  return MpsTensor(std::move(mats));
}

MpsTensor MpsTensor::scaled(double c) const {
  std::vector<Matrix> mats = mats_;
  for (auto& m : mats) m *= c;
  return MpsTensor(std::move(mats));
}

double MpsTensor::max_abs() const {
  double r = 0.0;
  for (const auto& m : mats_) r = std::max(r, m.cwiseAbs().maxCoeff());
  return r;
}

bool operator==(const MpsTensor& x, const MpsTensor& y) {
  if (x.d_ != y.d_ || x.D_ != y.D_) return false;
  for (std::size_t i = 0; i < x.mats_.size(); ++i)
    if (x.mats_[i] != y.mats_[i]) return false;
  return true;
}

std::size_t param_count(int d, int D) {
  return static_cast<std::size_t>(d) * static_cast<std::size_t>(D) * static_cast<std::size_t>(D + 1) / 2;
}

ParamVector pack(const MpsTensor& A) {
  const int d = A.phys_dim();
  const int D = A.bond_dim();
  ParamVector v{Vector(static_cast<Eigen::Index>(param_count(d, D)))};
  Eigen::Index k = 0;
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < D; ++a)
      for (int b = a; b < D; ++b) v.values[k++] = A[i](a, b);
  return v;
}

MpsTensor unpack(const ParamVector& v, int d, int D) {
  if (d < 1 || D < 1) throw DimensionError("unpack: d and D must be positive");
  if (static_cast<std::size_t>(v.size()) != param_count(d, D))
    throw DimensionError("unpack: parameter vector has length " + std::to_string(v.size()) + ", expected " +
                         std::to_string(param_count(d, D)));
  std::vector<Matrix> mats(static_cast<std::size_t>(d), Matrix(D, D));
  Eigen::Index k = 0;
  for (auto& m : mats)
    for (int a = 0; a < D; ++a)
      for (int b = a; b < D; ++b) {
        m(a, b) = v.values[k];
        m(b, a) = v.values[k];
        ++k;
      }
  return MpsTensor(std::move(mats));
}

SlotTensor::SlotTensor(int d, int D) : blocks(static_cast<std::size_t>(d), Matrix::Zero(D, D)) {}

SlotTensor& SlotTensor::operator+=(const SlotTensor& other) {
  if (other.blocks.size() != blocks.size()) throw DimensionError("SlotTensor: mismatched physical dimension");
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] += other.blocks[i];
  return *this;
}

SlotTensor& SlotTensor::operator-=(const SlotTensor& other) {
  if (other.blocks.size() != blocks.size()) throw DimensionError("SlotTensor: mismatched physical dimension");
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] -= other.blocks[i];
  return *this;
}

SlotTensor& SlotTensor::operator*=(double c) {
  for (auto& b : blocks) b *= c;
  return *this;
}

SlotTensor SlotTensor::transposed_blocks() const {
  SlotTensor t;
  t.blocks.reserve(blocks.size());
  for (const auto& b : blocks) t.blocks.push_back(b.transpose());
  return t;
}

double SlotTensor::max_abs() const {
  double r = 0.0;
  for (const auto& b : blocks) r = std::max(r, b.cwiseAbs().maxCoeff());
  return r;
}

double SlotTensor::frobenius() const {
  double s = 0.0;
  for (const auto& b : blocks) s += b.squaredNorm();
  return std::sqrt(s);
}

SlotTensor operator+(SlotTensor x, const SlotTensor& y) { return x += y; }
SlotTensor operator-(SlotTensor x, const SlotTensor& y) { return x -= y; }
SlotTensor operator*(double c, SlotTensor x) { return x *= c; }

Vector pack_gradient(const SlotTensor& raw) {
  const int d = raw.phys_dim();
  const int D = raw.bond_dim();
  Vector g(static_cast<Eigen::Index>(param_count(d, D)));
  Eigen::Index k = 0;
  for (int i = 0; i < d; ++i) {
    const Matrix& b = raw.blocks[static_cast<std::size_t>(i)];
    for (int a = 0; a < D; ++a) {
      g[k++] = b(a, a);
      for (int c = a + 1; c < D; ++c) g[k++] = b(a, c) + b(c, a);
    }
  }
  return g;
}

MpsTensor gauge_transform(const MpsTensor& A, const Matrix& X) {
  const int D = A.bond_dim();
  if (X.rows() != D || X.cols() != D) throw DimensionError("gauge_transform: X must be D x D");
  const double defect = (X.transpose() * X - Matrix::Identity(D, D)).cwiseAbs().maxCoeff();
  if (defect > 1e-12) throw ValidationError("gauge_transform: X is not orthogonal");
  std::vector<Matrix> mats;
  mats.reserve(static_cast<std::size_t>(A.phys_dim()));
  for (const auto& m : A.matrices()) {
    Matrix r = X * m * X.transpose();
    // Restore exact symmetry lost to rounding.
    mats.push_back(0.5 * (r + r.transpose()));
  }
  return MpsTensor(std::move(mats));
}

MpsTensor normalize(const MpsTensor& A, double lambda1) {
  if (!(lambda1 > 0.0)) throw NonPhysicalStateError("normalize: dominant transfer eigenvalue is not positive");
  return A.scaled(1.0 / std::sqrt(lambda1));
}

}  // namespace pbcmps
