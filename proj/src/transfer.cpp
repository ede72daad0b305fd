#include "pbcmps/transfer.hpp"

#include <string>

#include "pbcmps/errors.hpp"

namespace pbcmps {

const char* to_string(TransferKind kind) {
  switch (kind) {
    case TransferKind::plain: return "T";
    case TransferKind::vacant: return "T_A";
    case TransferKind::dressed: return "T_O";
    case TransferKind::hamiltonian: return "H_AA^AA";
    case TransferKind::hamiltonian_left: return "H_AA^.A";
    case TransferKind::hamiltonian_right: return "H_AA^A.";
  }
  return "?";
}

TransferOperator::TransferOperator(const MpsTensor& A, TransferKind kind)
    : kind_(kind), d_(A.phys_dim()), D_(A.bond_dim()), A_(A.matrices()) {}

TransferOperator TransferOperator::build(const MpsTensor& A, TransferKind kind, const std::optional<Matrix>& op) {
  if (A.phys_dim() < 1) throw DimensionError("TransferOperator: empty tensor");
  TransferOperator t(A, kind);
  const int d = t.d_;
  switch (kind) {
    case TransferKind::plain:
    case TransferKind::vacant:
      if (op) throw DimensionError(std::string(to_string(kind)) + " takes no operator");
      break;
    case TransferKind::dressed:
      if (!op) throw DimensionError("T_O requires a d x d operator");
      if (op->rows() != d || op->cols() != d) throw DimensionError("T_O operator must be d x d");
      t.op_ = *op;
      break;
    case TransferKind::hamiltonian:
    case TransferKind::hamiltonian_left:
    case TransferKind::hamiltonian_right: {
      if (!op) throw DimensionError("Hamiltonian blocks require a d^2 x d^2 operator");
      if (op->rows() != d * d || op->cols() != d * d)
        throw DimensionError("Hamiltonian block operator must be d^2 x d^2");
      t.op_ = *op;
      t.P_.resize(static_cast<std::size_t>(d * d));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) t.P_[static_cast<std::size_t>(i * d + j)] = t.A_[i] * t.A_[j];
      t.G_.assign(static_cast<std::size_t>(d * d), Matrix::Zero(t.D_, t.D_));
      for (int ij = 0; ij < d * d; ++ij)
        for (int kl = 0; kl < d * d; ++kl) {
          const double hv = t.op_(kl, ij);
          if (hv != 0.0) t.G_[static_cast<std::size_t>(ij)] += hv * t.P_[static_cast<std::size_t>(kl)];
        }
      break;
    }
  }
  return t;
}

bool TransferOperator::is_open() const noexcept {
  return kind_ == TransferKind::vacant || kind_ == TransferKind::hamiltonian_left ||
         kind_ == TransferKind::hamiltonian_right;
}

void TransferOperator::require_closed(const char* what) const {
  if (is_open())
    throw ValidationError(std::string(what) + ": not defined for open operator " + to_string(kind_));
}

void TransferOperator::require_open(const char* what) const {
  if (!is_open())
    throw ValidationError(std::string(what) + ": not defined for closed operator " + to_string(kind_));
}

Matrix TransferOperator::apply(const Matrix& V) const {
  require_closed("apply");
  if (V.rows() != D_ || V.cols() != D_) throw DimensionError("apply: expected a D x D matrix");
  Matrix out = Matrix::Zero(D_, D_);
  switch (kind_) {
    case TransferKind::plain:
      for (const auto& a : A_) out.noalias() += a * V * a;
      break;
    case TransferKind::dressed: {
      std::vector<Matrix> left(static_cast<std::size_t>(d_));
      for (int i = 0; i < d_; ++i) left[static_cast<std::size_t>(i)] = A_[i] * V;
      for (int k = 0; k < d_; ++k) {
        Matrix acc = Matrix::Zero(D_, D_);
        for (int i = 0; i < d_; ++i)
          if (op_(k, i) != 0.0) acc += op_(k, i) * left[static_cast<std::size_t>(i)];
        out.noalias() += acc * A_[k];
      }
      break;
    }
    case TransferKind::hamiltonian:
      for (std::size_t ij = 0; ij < P_.size(); ++ij) out.noalias() += P_[ij] * V * G_[ij].transpose();
      break;
    default:
      break;
  }
  return out;
}

Vector TransferOperator::apply(const Vector& v) const {
  if (v.size() != dim()) throw DimensionError("apply: expected a D^2 vector");
  return as_vector(apply(Matrix(as_matrix(v, D_))));
}

double TransferOperator::sandwich(const Vector& w, const Vector& u) const {
  if (w.size() != dim()) throw DimensionError("sandwich: expected a D^2 vector");
  return w.dot(apply(u));
}

SlotTensor TransferOperator::open_sandwich(const Vector& w, const Vector& u) const {
  require_open("open_sandwich");
  if (w.size() != dim() || u.size() != dim()) throw DimensionError("open_sandwich: expected D^2 vectors");
  const auto W = as_matrix(w, D_);
  const auto U = as_matrix(u, D_);
  SlotTensor out(d_, D_);
  switch (kind_) {
    case TransferKind::vacant:
      for (int i = 0; i < d_; ++i) out.blocks[static_cast<std::size_t>(i)].noalias() = W * A_[i] * U.transpose();
      break;
    case TransferKind::hamiltonian_left:
      for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) {
          const Matrix& g = G_[static_cast<std::size_t>(i * d_ + j)];
          out.blocks[static_cast<std::size_t>(i)].noalias() += W * g * U.transpose() * A_[j];
        }
      break;
    case TransferKind::hamiltonian_right:
      for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) {
          const Matrix& g = G_[static_cast<std::size_t>(i * d_ + j)];
          out.blocks[static_cast<std::size_t>(j)].noalias() += A_[i] * W * g * U.transpose();
        }
      break;
    default:
      break;
  }
  return out;
}

Matrix TransferOperator::dense() const {
  require_closed("dense");
  const Eigen::Index n = dim();
  if (n > kDenseLimit) throw CostGuardError("dense: D^2 exceeds the dense materialization limit");
  Matrix M(n, n);
  Vector e = Vector::Zero(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    e[c] = 1.0;
    M.col(c) = apply(e);
    e[c] = 0.0;
  }
  return M;
}

}  // namespace pbcmps
