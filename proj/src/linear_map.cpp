#include "skewflow/linear_map.hpp"

#include <stdexcept>

namespace skewflow {

LinearMap LinearMap::zero(Index n, bool sparse) {
  if (sparse) return LinearMap(SparseMatrix(n, n));
  return LinearMap(Matrix::Zero(n, n));
}

LinearMap LinearMap::identity(Index n, bool sparse) {
  if (sparse) {
    SparseMatrix id(n, n);
    id.setIdentity();
    return LinearMap(std::move(id));
  }
  return LinearMap(Matrix::Identity(n, n));
}

Index LinearMap::rows() const {
  return std::visit([](const auto& m) { return static_cast<Index>(m.rows()); }, store_);
}

Index LinearMap::cols() const {
  return std::visit([](const auto& m) { return static_cast<Index>(m.cols()); }, store_);
}

Vector LinearMap::apply(const Vector& x) const {
  if (x.size() != cols()) throw std::invalid_argument("LinearMap::apply: size mismatch");
  return std::visit([&](const auto& m) -> Vector { return m * x; }, store_);
}

Matrix LinearMap::apply(const Matrix& x) const {
  if (x.rows() != cols()) throw std::invalid_argument("LinearMap::apply: size mismatch");
  return std::visit([&](const auto& m) -> Matrix { return m * x; }, store_);
}

Matrix LinearMap::dense() const {
  if (const auto* s = std::get_if<SparseMatrix>(&store_)) return Matrix(*s);
  return std::get<Matrix>(store_);
}

SparseMatrix LinearMap::sparse() const {
  if (const auto* d = std::get_if<Matrix>(&store_)) return d->sparseView();
  return std::get<SparseMatrix>(store_);
}

LinearMap LinearMap::transposed() const {
  if (const auto* s = std::get_if<SparseMatrix>(&store_)) {
    return LinearMap(SparseMatrix(s->transpose()));
  }
  return LinearMap(Matrix(std::get<Matrix>(store_).transpose()));
}

LinearMap LinearMap::scaled(double s) const {
  return std::visit([&](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    return LinearMap(M(s * m));
  }, store_);
}

LinearMap LinearMap::plus(const LinearMap& other, double s) const {
  if (rows() != other.rows() || cols() != other.cols()) {
    throw std::invalid_argument("LinearMap::plus: shape mismatch");
  }
  if (is_sparse() && other.is_sparse()) {
    return LinearMap(SparseMatrix(sparse() + s * other.sparse()));
  }
  return LinearMap(Matrix(dense() + s * other.dense()));
}

LinearMap LinearMap::diag_sandwich(const Vector& left, const Vector& right) const {
  if (const auto* sp = std::get_if<SparseMatrix>(&store_)) {
    return LinearMap(SparseMatrix(left.asDiagonal() * (*sp) * right.asDiagonal()));
  }
  return LinearMap(Matrix(left.asDiagonal() * std::get<Matrix>(store_) * right.asDiagonal()));
}

}  // namespace skewflow
