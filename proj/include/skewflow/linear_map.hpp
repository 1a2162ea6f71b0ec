#pragma once

#include <variant>

#include "skewflow/types.hpp"

namespace skewflow {

/// Square linear action stored dense or sparse.
///
/// Small operators (interval models, user matrices) are dense; grid operators
/// (transport) stay sparse so that applying and factorising them scales.
class LinearMap {
 public:
  LinearMap() : store_(Matrix(0, 0)) {}
  explicit LinearMap(Matrix m) : store_(std::move(m)) {}
  explicit LinearMap(SparseMatrix m) : store_(std::move(m)) {}

  static LinearMap zero(Index n, bool sparse = false);
  static LinearMap identity(Index n, bool sparse = false);

  Index rows() const;
  Index cols() const;
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(store_); }

  Vector apply(const Vector& x) const;
  Matrix apply(const Matrix& x) const;

  // Copies in the other format when needed.
  Matrix dense() const;
  SparseMatrix sparse() const;

  // Transpose (Euclidean), same storage.
  LinearMap transposed() const;
  LinearMap scaled(double s) const;
  // this + s * other; sparse only if both are sparse.
  LinearMap plus(const LinearMap& other, double s = 1.0) const;
  // D1 * this * D2 with diagonal factors.
  LinearMap diag_sandwich(const Vector& left, const Vector& right) const;

 private:
  std::variant<Matrix, SparseMatrix> store_;
};

}  // namespace skewflow
