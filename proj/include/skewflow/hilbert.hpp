#pragma once

#include <memory>
#include <string>
#include <vector>

#include "skewflow/types.hpp"

namespace skewflow {

/// Finite-dimensional real inner-product space with a diagonal Gram matrix.
///
/// inner(u, v) = sum_i w_i u_i v_i. The weights are cell areas or quadrature
/// weights of the underlying discretisation and must all be positive.
/// Copies share the (immutable) weight storage.
class Space {
 public:
  explicit Space(Vector gram_weights, std::string label = {});

  static Space uniform(Index dim, std::string label = {});

  Index dim() const { return data_->weights.size(); }
  const Vector& weights() const { return data_->weights; }
  const std::string& label() const { return data_->label; }

  // sqrt(w) and 1/sqrt(w), cached.
  const Vector& sqrt_weights() const { return data_->sqrt_weights; }
  const Vector& inv_sqrt_weights() const { return data_->inv_sqrt_weights; }

  bool same_as(const Space& other) const;

 private:
  struct Data {
    Vector weights;
    Vector sqrt_weights;
    Vector inv_sqrt_weights;
    std::string label;
  };
  std::shared_ptr<const Data> data_;
};

/// A list of vectors spanning a subspace of a Space.
///
/// Two storage forms: dense columns, or scaled coordinate vectors
/// (scale_k * e_{index_k}). The coordinate form keeps domain bases of large
/// grid operators (whole space, interior cells) cheap.
class SubspaceBasis {
 public:
  SubspaceBasis(Space space, Matrix vectors, bool orthonormal = false);

  static SubspaceBasis coordinates(Space space, std::vector<Index> indices,
                                   Vector scales = {});
  // All coordinate vectors, in order.
  static SubspaceBasis whole(Space space);
  static SubspaceBasis empty(Space space);

  const Space& space() const { return space_; }
  Index size() const;
  bool orthonormal() const { return orthonormal_; }
  bool is_coordinate() const { return coordinate_; }
  bool covers_space() const { return size() == space_.dim(); }

  // Coordinate form only.
  const std::vector<Index>& indices() const { return indices_; }
  const Vector& scales() const { return scales_; }

  Vector vector(Index k) const;
  Matrix dense() const;
  SparseMatrix sparse() const;

 private:
  SubspaceBasis(Space space, std::vector<Index> indices, Vector scales,
                bool orthonormal);

  Space space_;
  bool coordinate_ = false;
  bool orthonormal_ = false;
  Matrix vectors_;
  std::vector<Index> indices_;
  Vector scales_;
};

double inner(const Space& space, const Vector& u, const Vector& v);
double norm(const Space& space, const Vector& u);

/// Gram-Schmidt (modified, with one re-orthogonalisation pass) in input
/// order. A vector whose residual norm is <= tol * (its input norm) is
/// dropped. The result carries the orthonormal flag.
SubspaceBasis orthonormalize(const SubspaceBasis& basis, double tol = 1e-8);

/// Largest |inner(b_i, b_j) - delta_ij| over the basis.
double orthonormality_defect(const SubspaceBasis& basis);

struct ComplementResult {
  SubspaceBasis basis;
  Vector singular_values;  // of the Gram-weighted image matrix, descending
  Index rank = 0;          // dim span(image)
  double threshold = 0.0;  // tol * sigma_max
};

/// Orthonormal basis of the Gram-orthogonal complement of span(image columns).
///
/// Rank is decided by singular values of W^{1/2} * image relative to
/// tol * sigma_max. The returned basis is put in a canonical orientation so
/// that coordinates in it are reproducible: the first vector is the
/// normalised projection of the constant vector (when it is not negligible)
/// with positive mass, the rest follow the singular-vector order, each with
/// its largest weighted component positive.
ComplementResult complement_with_spectrum(const Space& space,
                                          const Matrix& image, double tol = 1e-8);

SubspaceBasis complement_basis(const Space& space, const Matrix& image,
                               double tol = 1e-8);
SubspaceBasis complement_basis(const Space& space,
                               const std::vector<Vector>& image, double tol = 1e-8);

/// Numerical rank of the span of the columns, same rule as complement_basis.
Index span_rank(const Space& space, const Matrix& vectors, double tol = 1e-8);

/// Columns of a Matrix as a list.
std::vector<Vector> columns(const Matrix& m);
Matrix from_columns(const std::vector<Vector>& cols, Index rows);

}  // namespace skewflow
