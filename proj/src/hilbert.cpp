#include "skewflow/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace skewflow {

namespace {

void require_length(const Space& space, const Vector& v, const char* what) {
  if (v.size() != space.dim()) {
    throw std::invalid_argument(std::string(what) + ": vector length " +
                                std::to_string(v.size()) + " != space dim " +
                                std::to_string(space.dim()));
  }
}

// Index of the largest |sqrt(w_i) b_i|; near-ties resolve to the lowest index.
Index dominant_component(const Space& space, const Vector& b) {
  const Vector scaled = space.sqrt_weights().cwiseProduct(b).cwiseAbs();
  const double top = scaled.maxCoeff();
  for (Index i = 0; i < scaled.size(); ++i) {
    if (scaled(i) >= top * (1.0 - 1e-9)) return i;
  }
  return 0;
}

// Gram-Schmidt of candidate columns (in order) until `keep` vectors are found.
Matrix gram_schmidt(const Space& space, const std::vector<Vector>& candidates,
                    Index keep, double tol) {
  std::vector<Vector> out;
  for (const Vector& c : candidates) {
    if (static_cast<Index>(out.size()) == keep) break;
    const double in_norm = norm(space, c);
    if (!(in_norm > 0.0)) continue;
    Vector r = c;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& b : out) r -= inner(space, b, r) * b;
    }
    const double r_norm = norm(space, r);
    if (r_norm <= tol * in_norm) continue;
    out.push_back(r / r_norm);
  }
  return from_columns(out, space.dim());
}

}  // namespace

Space::Space(Vector gram_weights, std::string label) {
  if (gram_weights.size() == 0) {
    throw std::invalid_argument("Space: dimension must be positive");
  }
  for (Index i = 0; i < gram_weights.size(); ++i) {
    if (!(gram_weights(i) > 0.0) || !std::isfinite(gram_weights(i))) {
      throw std::invalid_argument("Space: gram weight " + std::to_string(i) +
                                  " is not a positive finite number");
    }
  }
  auto data = std::make_shared<Data>();
  data->sqrt_weights = gram_weights.cwiseSqrt();
  data->inv_sqrt_weights = data->sqrt_weights.cwiseInverse();
  data->weights = std::move(gram_weights);
  data->label = std::move(label);
  data_ = std::move(data);
}

Space Space::uniform(Index dim, std::string label) {
  if (dim <= 0) throw std::invalid_argument("Space: dimension must be positive");
  return Space(Vector::Ones(dim), std::move(label));
}

bool Space::same_as(const Space& other) const {
  return data_ == other.data_ || weights() == other.weights();
}

SubspaceBasis::SubspaceBasis(Space space, Matrix vectors, bool orthonormal)
    : space_(std::move(space)), orthonormal_(orthonormal), vectors_(std::move(vectors)) {
  if (vectors_.cols() > 0 && vectors_.rows() != space_.dim()) {
    throw std::invalid_argument("SubspaceBasis: vectors have length " +
                                std::to_string(vectors_.rows()) + ", space dim is " +
                                std::to_string(space_.dim()));
  }
  if (vectors_.cols() == 0) vectors_.resize(space_.dim(), 0);
}

SubspaceBasis::SubspaceBasis(Space space, std::vector<Index> indices, Vector scales,
                             bool orthonormal)
    : space_(std::move(space)),
      coordinate_(true),
      orthonormal_(orthonormal),
      indices_(std::move(indices)),
      scales_(std::move(scales)) {}

SubspaceBasis SubspaceBasis::coordinates(Space space, std::vector<Index> indices,
                                         Vector scales) {
  const Index n = space.dim();
  for (Index i : indices) {
    if (i < 0 || i >= n) {
      throw std::invalid_argument("SubspaceBasis: coordinate index " + std::to_string(i) +
                                  " out of range");
    }
  }
  if (scales.size() == 0) scales = Vector::Ones(static_cast<Index>(indices.size()));
  if (scales.size() != static_cast<Index>(indices.size())) {
    throw std::invalid_argument("SubspaceBasis: scales/indices length mismatch");
  }
  bool ortho = std::set<Index>(indices.begin(), indices.end()).size() == indices.size();
  for (size_t k = 0; ortho && k < indices.size(); ++k) {
    const double nrm = std::abs(scales(static_cast<Index>(k))) *
                       space.sqrt_weights()(indices[k]);
    ortho = std::abs(nrm - 1.0) <= 1e-14;
  }
  return SubspaceBasis(std::move(space), std::move(indices), std::move(scales), ortho);
}

SubspaceBasis SubspaceBasis::whole(Space space) {
  std::vector<Index> idx(static_cast<size_t>(space.dim()));
  for (Index i = 0; i < space.dim(); ++i) idx[static_cast<size_t>(i)] = i;
  return coordinates(std::move(space), std::move(idx));
}

SubspaceBasis SubspaceBasis::empty(Space space) {
  const Index n = space.dim();
  return SubspaceBasis(std::move(space), Matrix(n, 0), true);
}

Index SubspaceBasis::size() const {
  return coordinate_ ? static_cast<Index>(indices_.size()) : vectors_.cols();
}

Vector SubspaceBasis::vector(Index k) const {
  if (k < 0 || k >= size()) throw std::out_of_range("SubspaceBasis::vector");
  if (!coordinate_) return vectors_.col(k);
  Vector v = Vector::Zero(space_.dim());
  v(indices_[static_cast<size_t>(k)]) = scales_(k);
  return v;
}

Matrix SubspaceBasis::dense() const {
  if (!coordinate_) return vectors_;
  Matrix m = Matrix::Zero(space_.dim(), size());
  for (Index k = 0; k < size(); ++k) m(indices_[static_cast<size_t>(k)], k) = scales_(k);
  return m;
}

SparseMatrix SubspaceBasis::sparse() const {
  if (!coordinate_) return vectors_.sparseView();
  SparseMatrix m(space_.dim(), size());
  std::vector<Triplet> t;
  t.reserve(indices_.size());
  for (Index k = 0; k < size(); ++k) t.emplace_back(indices_[static_cast<size_t>(k)], k, scales_(k));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

double inner(const Space& space, const Vector& u, const Vector& v) {
  require_length(space, u, "inner");
  require_length(space, v, "inner");
  return (space.weights().array() * u.array() * v.array()).sum();
}

double norm(const Space& space, const Vector& u) {
  return std::sqrt(std::max(0.0, inner(space, u, u)));
}

SubspaceBasis orthonormalize(const SubspaceBasis& basis, double tol) {
  const Space& space = basis.space();
  if (basis.is_coordinate()) {
    // Distinct coordinate vectors are already orthogonal; rescale, drop repeats
    // and zero-scaled entries.
    std::vector<Index> idx;
    std::vector<double> scales;
    std::set<Index> seen;
    for (Index k = 0; k < basis.size(); ++k) {
      const Index i = basis.indices()[static_cast<size_t>(k)];
      if (basis.scales()(k) == 0.0 || !seen.insert(i).second) continue;
      idx.push_back(i);
      scales.push_back((basis.scales()(k) > 0 ? 1.0 : -1.0) * space.inv_sqrt_weights()(i));
    }
    Vector s = Eigen::Map<Vector>(scales.data(), static_cast<Index>(scales.size()));
    return SubspaceBasis::coordinates(space, std::move(idx), std::move(s));
  }
  const Matrix m = gram_schmidt(space, columns(basis.dense()), basis.size(), tol);
  return SubspaceBasis(space, m, true);
}

double orthonormality_defect(const SubspaceBasis& basis) {
  const Space& space = basis.space();
  if (basis.is_coordinate()) {
    double worst = 0.0;
    std::set<Index> seen;
    for (Index k = 0; k < basis.size(); ++k) {
      const Index i = basis.indices()[static_cast<size_t>(k)];
      const double nrm2 = basis.scales()(k) * basis.scales()(k) * space.weights()(i);
      worst = std::max(worst, std::abs(nrm2 - 1.0));
      if (!seen.insert(i).second) worst = std::max(worst, nrm2);
    }
    return worst;
  }
  const Matrix b = basis.dense();
  const Matrix g = b.transpose() * space.weights().asDiagonal() * b;
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

ComplementResult complement_with_spectrum(const Space& space, const Matrix& image,
                                          double tol) {
  const Index n = space.dim();
  if (image.cols() > 0 && image.rows() != n) {
    throw std::invalid_argument("complement_basis: image vectors have wrong length");
  }
  ComplementResult res{SubspaceBasis::empty(space), Vector(), 0, 0.0};

  Matrix null_dirs;  // Euclidean-orthonormal in the sqrt(W)-scaled coordinates
  if (image.cols() == 0 || image.cwiseAbs().maxCoeff() == 0.0) {
    null_dirs = Matrix::Identity(n, n);
    res.singular_values = Vector::Zero(std::min<Index>(n, image.cols()));
  } else {
    const Matrix scaled = space.sqrt_weights().asDiagonal() * image;
    Eigen::BDCSVD<Matrix> svd(scaled, Eigen::ComputeFullU);
    res.singular_values = svd.singularValues();
    const double smax = res.singular_values(0);
    res.threshold = tol * smax;
    Index rank = 0;
    for (Index i = 0; i < res.singular_values.size(); ++i) {
      if (res.singular_values(i) > res.threshold) ++rank;
    }
    res.rank = rank;
    null_dirs = svd.matrixU().rightCols(n - rank);
  }
  const Index d = null_dirs.cols();
  if (d == 0) return res;

  // Back to the original coordinates: Gram-orthonormal columns.
  const Matrix basis = space.inv_sqrt_weights().asDiagonal() * null_dirs;

  std::vector<Vector> candidates;
  candidates.reserve(static_cast<size_t>(d + 1));
  const Vector ones = Vector::Ones(n);
  const Vector coeff = basis.transpose() * space.weights().asDiagonal() * ones;
  const Vector mass_dir = basis * coeff;
  const bool has_mass = norm(space, mass_dir) > 1e-8 * norm(space, ones);
  if (has_mass) candidates.push_back(mass_dir);
  for (Index k = 0; k < d; ++k) candidates.emplace_back(basis.col(k));

  Matrix canon = gram_schmidt(space, candidates, d, 1e-8);
  for (Index k = 0; k < canon.cols(); ++k) {
    double sign;
    if (k == 0 && has_mass) {
      sign = inner(space, canon.col(k), ones) >= 0.0 ? 1.0 : -1.0;
    } else {
      sign = canon(dominant_component(space, canon.col(k)), k) >= 0.0 ? 1.0 : -1.0;
    }
    canon.col(k) *= sign;
  }
  res.basis = SubspaceBasis(space, canon, true);
  return res;
}

SubspaceBasis complement_basis(const Space& space, const Matrix& image, double tol) {
  return complement_with_spectrum(space, image, tol).basis;
}

SubspaceBasis complement_basis(const Space& space, const std::vector<Vector>& image,
                               double tol) {
  for (const Vector& v : image) require_length(space, v, "complement_basis");
  return complement_basis(space, from_columns(image, space.dim()), tol);
}

Index span_rank(const Space& space, const Matrix& vectors, double tol) {
  if (vectors.cols() == 0 || vectors.cwiseAbs().maxCoeff() == 0.0) return 0;
  const Matrix scaled = space.sqrt_weights().asDiagonal() * vectors;
  Eigen::BDCSVD<Matrix> svd(scaled);
  const Vector& s = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * s(0)) ++rank;
  }
  return rank;
}

std::vector<Vector> columns(const Matrix& m) {
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(m.cols()));
  for (Index k = 0; k < m.cols(); ++k) out.emplace_back(m.col(k));
  return out;
}

Matrix from_columns(const std::vector<Vector>& cols, Index rows) {
  Matrix m(rows, static_cast<Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) {
    if (cols[k].size() != rows) throw std::invalid_argument("from_columns: ragged input");
    m.col(static_cast<Index>(k)) = cols[k];
  }
  return m;
}

}  // namespace skewflow
