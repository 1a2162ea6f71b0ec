#pragma once

#include <memory>
#include <string>
#include <vector>

#include "skewflow/operator_model.hpp"

namespace skewflow {

enum class StepMethod { exact_exponential, cayley_step };

std::string to_string(StepMethod m);

struct StepperMeta {
  StepMethod method = StepMethod::exact_exponential;
  double dt = 0.0;
  double solver_tol = 0.0;  // observed relative residual of the linear solves
  Index stride = 1;         // states kept every `stride` steps
};

struct Trajectory {
  Space space;
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> norms;
  StepperMeta meta;
  // Norm after every step, including steps not kept in `states`.
  std::vector<double> step_norms;

  double horizon() const { return times.empty() ? 0.0 : times.back(); }
};

// Throws SpecError("extend the operator first") unless the domain is the whole space.
void require_full_domain(const Generator& gen);

/// exp(tB) computed as W^{-1/2} exp(t W^{1/2} B W^{-1/2}) W^{1/2}; the
/// similarity keeps skew generators skew in Euclidean form, which is what the
/// Pade scaling-and-squaring routine sees.
class ExactPropagator {
 public:
  explicit ExactPropagator(const Generator& gen);
  Matrix matrix(double t) const;
  Vector apply(double t, const Vector& u) const;
  const Space& space() const { return space_; }

 private:
  Space space_;
  Matrix sym_;  // W^{1/2} B W^{-1/2}
};

Trajectory evolve_exact(const Generator& gen, const Vector& u0,
                        const std::vector<double>& times);

/// Trapezoidal (Cayley) step u+ = (E - dt/2 B)^{-1}(E + dt/2 B)u with the
/// left matrix factorised once.
class CayleyStepper {
 public:
  CayleyStepper(const Generator& gen, double dt);
  ~CayleyStepper();
  CayleyStepper(CayleyStepper&&) noexcept;
  CayleyStepper& operator=(CayleyStepper&&) noexcept;

  Vector step(const Vector& u) const;
  double dt() const { return dt_; }
  // Relative residual ||L x - r|| / ||r|| of the most recent solve.
  double last_residual() const { return last_residual_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double dt_;
  mutable double last_residual_ = 0.0;
};

Trajectory evolve_cayley(const Generator& gen, const Vector& u0, double dt, Index nsteps,
                         Index stride = 1);

/// Generator of the adjoint semigroup: B* = W^{-1} B^T W.
Generator adjoint_generator(const Generator& gen);
Trajectory adjoint_trajectory(const Generator& gen, const Vector& u0,
                              const std::vector<double>& times);

// 0, dt, 2dt, ..., n*dt.
std::vector<double> uniform_times(double dt, Index n);

}  // namespace skewflow
