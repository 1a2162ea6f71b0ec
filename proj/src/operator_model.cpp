#include "skewflow/operator_model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skewflow/error.hpp"

namespace skewflow {

namespace {

// Sparse path: sparse action and a coordinate domain basis.
bool use_sparse(const LinearMap& m, const SubspaceBasis& b) {
  return m.is_sparse() && b.is_coordinate();
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double max_abs(const SparseMatrix& m) {
  double out = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) out = std::max(out, std::abs(it.value()));
  }
  return out;
}

// Gram form G_ij = inner(u_i, B u_j) for orthonormal bases, dense.
Matrix gram_form(const Space& space, const LinearMap& b, const Matrix& left,
                 const Matrix& right) {
  return left.transpose() * space.weights().asDiagonal() * b.apply(right);
}

SparseMatrix gram_form_sparse(const Space& space, const LinearMap& b,
                              const SparseMatrix& left, const SparseMatrix& right) {
  const SparseMatrix wb = space.weights().asDiagonal() * b.sparse();
  return SparseMatrix(left.transpose() * wb * right);
}

}  // namespace

RestrictedOperator::RestrictedOperator(Space s, LinearMap m, SubspaceBasis d, std::string l)
    : space(std::move(s)), action(std::move(m)), domain(std::move(d)), label(std::move(l)) {
  if (action.rows() != space.dim() || action.cols() != space.dim()) {
    throw SpecError("operator action is " + std::to_string(action.rows()) + "x" +
                    std::to_string(action.cols()) + ", space dim is " +
                    std::to_string(space.dim()));
  }
  if (!domain.space().same_as(space)) {
    throw SpecError("domain basis lives in a different space");
  }
}

Matrix orthonormal_domain(const RestrictedOperator& op) {
  return orthonormalize(op.domain).dense();
}

SkewReport check_skew_symmetry(const RestrictedOperator& op, double tol) {
  SkewReport rep;
  rep.tol = tol;
  const SubspaceBasis ob = orthonormalize(op.domain);
  if (ob.size() == 0) {
    rep.pass = true;
    return rep;
  }
  if (use_sparse(op.action, ob)) {
    const SparseMatrix p = ob.sparse();
    const SparseMatrix g = gram_form_sparse(op.space, op.action, p, p);
    const SparseMatrix gt = g.transpose();
    rep.max_defect = max_abs(SparseMatrix(g + gt));
    rep.scale = max_abs(g);
  } else {
    const Matrix u = ob.dense();
    const Matrix g = gram_form(op.space, op.action, u, u);
    rep.max_defect = max_abs(Matrix(g + g.transpose()));
    rep.scale = max_abs(g);
  }
  rep.pass = rep.max_defect <= tol;
  return rep;
}

DeficiencyData deficiency(const RestrictedOperator& op, double tol) {
  const SkewReport skew = check_skew_symmetry(op, 1e-8);
  if (skew.max_defect > 1e-8 * std::max(1.0, skew.scale)) {
    throw SpecError("operator is not skew-symmetric on its domain (defect " +
                    std::to_string(skew.max_defect) + ")");
  }
  DeficiencyData out(op.space);
  out.tol_used = tol;
  // E -+ M are injective on a skew domain, so a full domain has full images.
  if (orthonormalize(op.domain).size() == op.dim()) return out;
  const Matrix u = orthonormal_domain(op);
  const Matrix mu = op.action.apply(u);

  auto side = [&](const Matrix& image, SubspaceBasis& basis, Index& d, double& gap) {
    ComplementResult c = complement_with_spectrum(op.space, image, tol);
    basis = c.basis;
    d = basis.size();
    const Vector& s = c.singular_values;
    if (c.rank > 0 && s.size() > 0 && s(0) > 0) gap = s(c.rank - 1) / s(0);
    for (Index i = 0; i < s.size(); ++i) {
      if (s(i) > c.threshold / 10.0 && s(i) < c.threshold * 10.0) out.ill_conditioned = true;
    }
  };
  side(u - mu, out.n_minus, out.d_minus, out.minus_gap);
  side(u + mu, out.n_plus, out.d_plus, out.plus_gap);
  return out;
}

CayleyData cayley(const RestrictedOperator& op) {
  const Matrix u = orthonormal_domain(op);
  const Index k = u.cols();
  const Matrix mu = op.action.apply(u);
  const Matrix minus = u - mu;
  const Matrix plus = u + mu;
  CayleyData out{SubspaceBasis::empty(op.space), Matrix(op.dim(), 0), Matrix(k, 0)};
  if (k == 0) return out;
  // W^{1/2}(E - M)U = QR; the combinations R^{-1} make the (E - M) images
  // orthonormal, and the matched (E + M) images inherit the same Gram matrix.
  const Matrix scaled = op.space.sqrt_weights().asDiagonal() * minus;
  Eigen::HouseholderQR<Matrix> qr(scaled);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Matrix coeffs =
      r.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
  out.domain_coeffs = coeffs;
  out.h_minus = SubspaceBasis(op.space, minus * coeffs, true);
  out.q_images = plus * coeffs;
  return out;
}

Matrix reference_isometry(Index d, double theta) {
  Matrix v = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) v(i, i) = i == 0 ? theta : -theta;
  return v;
}

RestrictedOperator extend(const RestrictedOperator& op, const ExtensionSpec& spec, double tol) {
  return extend(op, deficiency(op, tol), spec, tol);
}

RestrictedOperator extend(const RestrictedOperator& op, const DeficiencyData& def,
                          const ExtensionSpec& spec, double /*tol*/) {
  const Matrix& v = spec.V;
  if (def.d_plus == 0 && def.d_minus == 0) {
    if (v.size() != 0) throw SpecError("operator has zero deficiency; V must be empty");
    return op;
  }
  if (v.rows() != def.d_minus || v.cols() != def.d_plus) {
    throw SpecError("V must be " + std::to_string(def.d_minus) + "x" +
                    std::to_string(def.d_plus) + " (d_minus x d_plus), got " +
                    std::to_string(v.rows()) + "x" + std::to_string(v.cols()));
  }
  if (spec.kind == ExtensionKind::skew_symmetric) {
    if (def.d_plus != def.d_minus) {
      throw SpecError("a skew-symmetric extension needs d_plus = d_minus");
    }
    const double orth = max_abs(Matrix(v.transpose() * v - Matrix::Identity(v.cols(), v.cols())));
    if (orth > 1e-10) throw SpecError("V is not orthogonal (defect " + std::to_string(orth) + ")");
  } else {
    Eigen::JacobiSVD<Matrix> svd(v);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    if (smax > 1.0 + 1e-12) {
      throw SpecError("V is not a contraction (largest singular value " +
                      std::to_string(smax) + ")");
    }
  }

  const Index n = op.dim();
  const Matrix u = orthonormal_domain(op);
  const Index k = u.cols();
  if (k + def.d_plus != n) {
    throw ExtensionError("extension domain not dense");
  }
  const Matrix np = def.n_plus.dense();
  const Matrix nm = def.n_minus.dense();

  // On N_plus the generator-side Cayley map is x -> Vx; with B = -A~ this
  // puts (x + Vx)/2 in the domain with A~((x + Vx)/2) = (x - Vx)/2.
  Matrix z(n, n), r(n, n);
  z.leftCols(k) = u;
  r.leftCols(k) = op.action.apply(u);
  z.rightCols(def.d_plus) = 0.5 * (np + nm * v);
  r.rightCols(def.d_plus) = 0.5 * (np - nm * v);

  // A~ = R Z^{-1} = R Zs^{-1} W^{1/2} with Zs = W^{1/2} Z; solved as
  // Zs^T X^T = R^T.
  const Matrix zs_t = (op.space.sqrt_weights().asDiagonal() * z).transpose();
  Eigen::PartialPivLU<Matrix> lu(zs_t);
  if (!(lu.rcond() > 1e-12)) throw ExtensionError("extension domain not dense");
  const Matrix at = lu.solve(r.transpose()).transpose() * op.space.sqrt_weights().asDiagonal();

  std::string label = op.label.empty() ? "extension" : op.label + " extension";
  return RestrictedOperator(op.space, LinearMap(at), SubspaceBasis::whole(op.space), label);
}

double restriction_defect(const RestrictedOperator& ext, const RestrictedOperator& op) {
  const SubspaceBasis ob = orthonormalize(op.domain);
  if (ob.size() == 0) return 0.0;
  double worst = 0.0, scale = 0.0;
  auto accumulate = [&](const Matrix& diff, const Matrix& mu) {
    for (Index c = 0; c < diff.cols(); ++c) {
      worst = std::max(worst, norm(op.space, diff.col(c)));
      scale = std::max(scale, norm(op.space, mu.col(c)));
    }
  };
  if (ext.action.is_sparse() && op.action.is_sparse() && ob.is_coordinate()) {
    const SparseMatrix p = ob.sparse();
    const SparseMatrix mu = op.action.sparse() * p;
    const SparseMatrix diff = ext.action.sparse() * p - mu;
    accumulate(Matrix(diff), Matrix(mu));
  } else {
    const Matrix u = ob.dense();
    const Matrix mu = op.action.apply(u);
    accumulate(ext.action.apply(u) - mu, mu);
  }
  return scale > 0.0 ? worst / scale : worst;
}

Generator negated(const RestrictedOperator& op, std::string provenance) {
  if (provenance.empty()) provenance = "-(" + op.label + ")";
  return Generator{op.space, op.action.scaled(-1.0), op.domain, std::move(provenance)};
}

DissipativityReport check_m_dissipative(const Generator& gen,
                                        const std::vector<double>& h_list, double tol) {
  DissipativityReport rep;
  rep.tol = tol;
  rep.h_list = h_list;
  const Index n = gen.space.dim();
  const SubspaceBasis ob = orthonormalize(gen.domain);
  const Index k = ob.size();

  if (k > 0) {
    if (use_sparse(gen.action, ob) && k > 1500) {
      // Gershgorin bound on the symmetric part of the Gram form.
      const SparseMatrix p = ob.sparse();
      const SparseMatrix g = gram_form_sparse(gen.space, gen.action, p, p);
      const SparseMatrix s = 0.5 * (g + SparseMatrix(g.transpose()));
      Vector diag = Vector::Zero(k), off = Vector::Zero(k);
      for (Index c = 0; c < s.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(s, c); it; ++it) {
          if (it.row() == it.col()) diag(it.row()) += it.value();
          else off(it.row()) += std::abs(it.value());
        }
      }
      rep.max_quadratic = (diag + off).maxCoeff();
      rep.quadratic_exact = false;
    } else {
      const Matrix u = ob.dense();
      const Matrix g = gram_form(gen.space, gen.action, u, u);
      const Matrix s = 0.5 * (g + g.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
      rep.max_quadratic = eig.eigenvalues().maxCoeff();
    }
  }
  rep.quadratic_pass = rep.max_quadratic <= tol;

  rep.range_pass = true;
  for (double h : h_list) {
    Index rank = 0;
    if (k < n) {
      // Range of (E - hB) on a k-dimensional domain has dimension at most k.
      const Matrix u = ob.dense();
      const Matrix img = gen.space.sqrt_weights().asDiagonal() * (u - h * gen.action.apply(u));
      Eigen::ColPivHouseholderQR<Matrix> qr(img);
      qr.setThreshold(1e-10);
      rank = k ? qr.rank() : 0;
    } else if (gen.action.is_sparse()) {
      SparseMatrix id(n, n);
      id.setIdentity();
      SparseMatrix step = id - h * gen.action.sparse();
      step.makeCompressed();
      Eigen::SparseLU<SparseMatrix> lu;
      lu.compute(step);
      rank = lu.info() == Eigen::Success ? n : n - 1;
    } else {
      const Matrix step = Matrix::Identity(n, n) - h * gen.action.dense();
      Eigen::ColPivHouseholderQR<Matrix> qr(step);
      qr.setThreshold(1e-12);
      rank = qr.rank();
    }
    rep.ranks.push_back(rank);
    if (rank != n) rep.range_pass = false;
  }
  rep.pass = rep.quadratic_pass && rep.range_pass;
  return rep;
}

InclusionReport check_inclusion_in_adjoint(const Generator& gen, const RestrictedOperator& op,
                                           double tol) {
  InclusionReport rep;
  rep.tol = tol;
  if (!gen.space.same_as(op.space)) throw SpecError("generator and operator spaces differ");
  const SubspaceBasis gb = orthonormalize(gen.domain);
  const SubspaceBasis ob = orthonormalize(op.domain);
  if (gb.size() == 0 || ob.size() == 0) {
    rep.pass = true;
    return rep;
  }
  const Vector& w = op.space.weights();
  if (gen.action.is_sparse() && op.action.is_sparse() && gb.is_coordinate() &&
      ob.is_coordinate()) {
    const SparseMatrix pu = gb.sparse();
    const SparseMatrix pv = ob.sparse();
    const SparseMatrix bu = gen.action.sparse() * pu;
    const SparseMatrix mv = op.action.sparse() * pv;
    const SparseMatrix lhs = SparseMatrix(bu.transpose()) * w.asDiagonal() * pv;
    const SparseMatrix rhs = SparseMatrix(pu.transpose()) * w.asDiagonal() * mv;
    rep.max_defect = max_abs(SparseMatrix(lhs - rhs));
  } else {
    const Matrix u = gb.dense();
    const Matrix v = ob.dense();
    const Matrix lhs = gen.action.apply(u).transpose() * w.asDiagonal() * v;
    const Matrix rhs = u.transpose() * w.asDiagonal() * op.action.apply(v);
    rep.max_defect = max_abs(Matrix(lhs - rhs));
  }
  rep.pass = rep.max_defect <= tol;
  return rep;
}

}  // namespace skewflow
