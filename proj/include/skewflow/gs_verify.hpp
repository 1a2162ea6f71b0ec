#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "skewflow/operator_model.hpp"
#include "skewflow/semigroup.hpp"

namespace skewflow {

enum class ProfileKind { poly_spline, mollified_cutoff };

/// Scalar C^1 test profile on [0, T] vanishing from some point on.
///
/// poly_spline(tau):           phi(t) = (1 - t/tau)^3 for t < tau, 0 after.
/// mollified_cutoff(t0, nu):   theta_nu(t - t0) with the mollifier
///                             beta(s) = 6(-s)(1+s) on [-1, 0]; equals 1 for
///                             t <= t0 - 1/nu and 0 for t >= t0.
struct TemporalProfile {
  ProfileKind kind = ProfileKind::poly_spline;
  double p1 = 1.0;  // tau, or t0
  double p2 = 0.0;  // unused, or nu

  double value(double t) const;
  double derivative(double t) const;
  // Last time at which the profile can be nonzero.
  double support_end() const;
  std::string name() const;
};

TemporalProfile poly_spline(double tau);
TemporalProfile mollified_cutoff(double t0, double nu);

// Five splines with tau = T * {0.2, 0.4, 0.6, 0.8, 1.0} and three cutoffs at
// t0 = T with nu = {4, 16, 64} / T.
std::vector<TemporalProfile> default_profiles(double T);

struct TestFunctionFamily {
  std::vector<Vector> spatial_vectors;
  std::vector<TemporalProfile> profiles;
  double T = 1.0;
  Index n_t = 1000;  // trapezoid intervals; nodes t_k = k T / n_t
};

/// Validates that every spatial vector lies in op.domain and every profile
/// vanishes at T. Throws SpecError otherwise.
TestFunctionFamily make_family(const RestrictedOperator& op, std::vector<Vector> spatial,
                               std::vector<TemporalProfile> profiles, double T, Index n_t);

/// Gram-orthogonal projection onto op.domain of a few smooth probes
/// sin(pi (j+1) (i+1/2) / n), orthonormalised.
std::vector<Vector> default_spatial_vectors(const RestrictedOperator& op, Index count = 4);

// Relative distance of v from span(op.domain).
double domain_distance(const RestrictedOperator& op, const Vector& v);

/// Candidate solution t -> u(t). Point evaluation plus an optional batched
/// evaluation on a uniform grid (used by the residual engine; closed forms
/// that are expensive pointwise provide it).
class Sampler {
 public:
  struct Grid {
    std::vector<Vector> states;
    double interp_error = 0.0;  // sup-in-time bound on the evaluation error
  };
  using PointFn = std::function<Vector(double)>;
  using GridFn = std::function<Grid(double dt, Index count)>;

  Sampler(PointFn point, double horizon, std::string label, GridFn grid = {});

  Vector operator()(double t) const { return point_(t); }
  // States at k*dt for k = 0..count-1.
  Grid grid(double dt, Index count) const;
  double horizon() const { return horizon_; }
  const std::string& label() const { return label_; }

 private:
  PointFn point_;
  GridFn grid_;
  double horizon_;
  std::string label_;
};

/// Piecewise-linear interpolation of a trajectory. Grid requests that land on
/// stored times return the states themselves; otherwise the interpolation
/// bound max_k ||u_{k+1} - 2u_k + u_{k-1}|| / 8 is reported.
Sampler from_trajectory(const Trajectory& tr);

/// t -> exp(tB) u0, gridded through powers of exp(dt B).
Sampler semigroup_sampler(const Generator& gen, const Vector& u0,
                          double horizon = std::numeric_limits<double>::infinity());

/// t -> e^t u0.
Sampler exp_sampler(const Vector& u0);

struct GsReport {
  Matrix residuals;  // spatial x temporal
  double max_residual = 0.0;
  double quadrature_error_estimate = 0.0;
  double tol = 0.0;
  bool pass = false;
  double T = 0.0;
  Index n_t = 0;
  std::vector<std::string> profile_names;
  std::string candidate;
};

/// Normalised weak residual
///   |int (u,v) phi' + int (u,Mv) phi + (u0,v) phi(0)| / (||u0|| ||f||)
/// for f = v phi over the family. ||f|| = sup_t sqrt(phi^2 (||v||^2 +
/// ||Mv||^2) + phi'^2 ||v||^2). The (u,v)phi' integral is summed as
/// sum 1/2 (a_k + a_{k+1})(phi_{k+1} - phi_k), exact for constant candidates.
GsReport gs_residual(const Sampler& candidate, const Vector& u0,
                     const RestrictedOperator& op, const TestFunctionFamily& family,
                     double tol);

struct Witness {
  Vector u0;
  Sampler exp_solution;
  DeficiencyData deficiency;
};

/// u0 = first N_minus vector; e^t u0 is a generalized solution because u0 is
/// orthogonal to Im(E - M). Throws UniquenessError when d_minus = 0.
Witness witness_nonuniqueness(const RestrictedOperator& op, double tol = 1e-8);

/// e^t u0 up to t0, then e^{t0} T_{t - t0} u0. Throws SpecError if gen is not
/// dissipative with full domain or does not weakly extend -op.
Sampler splice(const Witness& witness, const Generator& gen, const RestrictedOperator& op,
               double t0);

struct MultiplicityDemo {
  RestrictedOperator ext1;
  RestrictedOperator ext2;
  Trajectory traj1;
  Trajectory traj2;
  double separation = 0.0;  // max over stored times of ||u1 - u2||
};

/// Extensions with V = +-reference_isometry(d, 1), same u0, Cayley stepper.
/// Throws UniquenessError when the operator is maximal.
MultiplicityDemo semigroup_multiplicity_demo(const RestrictedOperator& op, const Vector& u0,
                                             double horizon, double dt, double tol = 1e-8);

std::vector<double> compare_solutions(const Sampler& a, const Sampler& b, const Space& space,
                                      const std::vector<double>& times);

}  // namespace skewflow
