#pragma once

#include <string>
#include <vector>

#include "skewflow/hilbert.hpp"
#include "skewflow/linear_map.hpp"

namespace skewflow {

/// Ambient action u -> Mu on a Space together with the subspace on which the
/// operator is actually defined. The adjoint is never formed; statements
/// about it are checked through inner-product defects.
struct RestrictedOperator {
  Space space;
  LinearMap action;
  SubspaceBasis domain;
  std::string label;

  RestrictedOperator(Space s, LinearMap m, SubspaceBasis d, std::string l = {});

  Index dim() const { return space.dim(); }
  bool full_domain() const { return domain.covers_space(); }
};

struct SkewReport {
  double max_defect = 0.0;  // on a Gram-orthonormal domain basis
  double scale = 0.0;       // largest |inner(Mu, v)| on the same basis
  double tol = 0.0;
  bool pass = false;
};

/// max |inner(Mu,v) + inner(u,Mv)| over an orthonormalised domain basis; the
/// diagonal terms are 2|inner(Mu,u)|.
SkewReport check_skew_symmetry(const RestrictedOperator& op, double tol);

struct DeficiencyData {
  explicit DeficiencyData(const Space& s)
      : n_plus(SubspaceBasis::empty(s)), n_minus(SubspaceBasis::empty(s)) {}

  Index d_plus = 0;
  Index d_minus = 0;
  SubspaceBasis n_plus;   // complement of Im(E + M) on the domain
  SubspaceBasis n_minus;  // complement of Im(E - M) on the domain
  double tol_used = 0.0;
  bool ill_conditioned = false;
  // Smallest singular value that was kept as rank, relative to sigma_max, for
  // each side. Useful when judging how clear-cut the rank decision was.
  double plus_gap = 0.0;
  double minus_gap = 0.0;
};

/// Deficiency subspaces from rank-revealing SVDs of the images (E -+ M)U.
/// Throws SpecError if the operator is not skew on its domain.
DeficiencyData deficiency(const RestrictedOperator& op, double tol = 1e-8);

/// Pairwise representation of Q = (E + A)(E - A)^{-1}: column k of h_minus is
/// (E - M)u_k for a domain combination u_k, column k of q_images is (E + M)u_k
/// for the same u_k. The u_k are chosen so that h_minus is Gram-orthonormal.
struct CayleyData {
  SubspaceBasis h_minus;
  Matrix q_images;
  Matrix domain_coeffs;  // u_k as combinations of the orthonormal domain basis
};

CayleyData cayley(const RestrictedOperator& op);

enum class ExtensionKind { skew_symmetric, dissipative_contraction };

/// V is a d_minus x d_plus matrix acting from N_plus coordinates to N_minus
/// coordinates (canonical bases of DeficiencyData). It defines the Cayley map
/// of the generator side B = -A~ on N_plus.
struct ExtensionSpec {
  Matrix V;
  ExtensionKind kind = ExtensionKind::skew_symmetric;
};

/// theta * diag(1, -1, ..., -1): the two theta = +-1 boundary couplings of
/// the interval model in its canonical deficiency coordinates.
Matrix reference_isometry(Index d, double theta);

/// Extension of op with full domain (when d_plus = d_minus) built from V.
/// Throws ExtensionError("extension domain not dense") when Im(P + E) is
/// rank deficient and SpecError when V does not match the declared kind.
RestrictedOperator extend(const RestrictedOperator& op, const ExtensionSpec& spec,
                          double tol = 1e-8);
RestrictedOperator extend(const RestrictedOperator& op, const DeficiencyData& def,
                          const ExtensionSpec& spec, double tol = 1e-8);

/// max_k ||(A~ - M)u_k|| / max_k ||M u_k|| over an orthonormal basis of
/// op.domain (falls back to the absolute value when M vanishes there).
double restriction_defect(const RestrictedOperator& ext, const RestrictedOperator& op);

struct Generator {
  Space space;
  LinearMap action;
  SubspaceBasis domain;
  std::string provenance;
};

// B = -A on A's domain.
Generator negated(const RestrictedOperator& op, std::string provenance = {});

struct DissipativityReport {
  double max_quadratic = 0.0;  // sup inner(Bu,u) / ||u||^2 on the domain
  bool quadratic_exact = true; // false when only a Gershgorin bound was used
  std::vector<double> h_list;
  std::vector<Index> ranks;    // rank of (E - hB) on the domain, per h
  double tol = 0.0;
  bool quadratic_pass = false;
  bool range_pass = false;
  bool pass = false;
};

DissipativityReport check_m_dissipative(const Generator& gen,
                                        const std::vector<double>& h_list,
                                        double tol);

struct InclusionReport {
  double max_defect = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Weak form of B contained in A*: max |inner(Bu,v) - inner(u,Mv)| over
/// orthonormal bases of gen.domain and op.domain.
InclusionReport check_inclusion_in_adjoint(const Generator& gen,
                                           const RestrictedOperator& op, double tol);

/// Gram-orthonormal dense basis of the domain.
Matrix orthonormal_domain(const RestrictedOperator& op);

}  // namespace skewflow
