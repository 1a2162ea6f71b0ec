#pragma once

#include <functional>
#include <string>
#include <vector>

#include "skewflow/operator_model.hpp"

namespace skewflow {

using ScalarFn = std::function<double(double)>;

/// d/dx on [0,1]: n nodes, trapezoid Gram weights, centred differences in the
/// skew form (S_{i,i+1} = 1/2, S_{i+1,i} = -1/2, M = W^{-1}S). The domain is
/// {u_0 = u_{n-1} = 0}; on it the boundary rows reduce to the one-sided
/// closures (u_1 - u_0)/h and (u_{n-1} - u_{n-2})/h.
RestrictedOperator minimal_derivative_operator(Index n);

// Node coordinates x_i = i/(n-1).
Vector interval_nodes(Index n);
Vector sample(const Vector& x, const ScalarFn& f);

/// Continuum flow of the theta-boundary extension of d/dx on [0,1]: right
/// shift, mass leaving at x = 1 re-enters at x = 0 multiplied by theta.
double interval_shift_value(double theta, double t, const ScalarFn& u0, double x);
Vector interval_shift_semigroup(double theta, double t, const ScalarFn& u0, const Vector& x);
/// Same flow for node samples on [0,1]: u0 is linearly interpolated.
Vector interval_shift_semigroup(double theta, double t, const Vector& u0_samples);

enum class OracleName { interval_minimal, interval_theta, halfline_right, halfline_left };

/// Closed-form description of one continuum case. `sign` is the operator
/// A_0 = sign * d/dx the data refer to.
struct OracleCase {
  OracleName name;
  std::string label;
  double theta = 0.0;
  int sign = 1;
  double a = 0.0, b = 1.0;  // interval; infinities allowed
  Index d_plus = 0;
  Index d_minus = 0;
  // Unit-norm deficiency vectors when they exist (N_plus, N_minus).
  ScalarFn n_plus;
  ScalarFn n_minus;
  // (T_t u0)(x).
  std::function<double(double t, const ScalarFn& u0, double x)> semigroup;
  bool forward_unique() const { return d_minus == 0; }
  bool backward_unique() const { return d_plus == 0; }
};

OracleCase interval_case(double theta);  // theta outside [-1,1] is rejected
OracleCase interval_minimal_case();
enum class HalfLine { right, left };
OracleCase halfline_case(HalfLine side);

/// Weak identity of e^t u0 against f(t,x) = phi(t) psi(x) on the continuum,
/// with psi ranging over C_0^1 bumps inside the case's interval and phi over
/// the default temporal profiles on [0,T]. Integrals by adaptive
/// Gauss-Kronrod. Returned values are |residual| / (||u0|| * ||f||).
struct ContinuumCheck {
  std::vector<double> residuals;
  double max_residual = 0.0;
  double u0_norm = 0.0;
  bool pass = false;
};
ContinuumCheck continuum_exp_witness_check(const OracleCase& c, const ScalarFn& u0,
                                           double T, double tol);

}  // namespace skewflow
