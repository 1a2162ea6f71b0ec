#include "skewflow/semigroup.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/MatrixFunctions>

#include "skewflow/error.hpp"

namespace skewflow {

std::string to_string(StepMethod m) {
  return m == StepMethod::exact_exponential ? "exact_exponential" : "cayley_step";
}

void require_full_domain(const Generator& gen) {
  bool full = gen.domain.covers_space();
  if (full) {
    full = gen.domain.is_coordinate()
               ? orthonormalize(gen.domain).size() == gen.space.dim()
               : span_rank(gen.space, gen.domain.dense()) == gen.space.dim();
  }
  if (!full) throw SpecError("extend the operator first");
}

std::vector<double> uniform_times(double dt, Index n) {
  std::vector<double> t(static_cast<size_t>(n + 1));
  for (Index k = 0; k <= n; ++k) t[static_cast<size_t>(k)] = static_cast<double>(k) * dt;
  return t;
}

namespace {

void check_times(const std::vector<double>& times) {
  if (times.empty() || times.front() != 0.0) throw SpecError("times must start at 0");
  for (size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw SpecError("times must be strictly increasing");
  }
}

}  // namespace

ExactPropagator::ExactPropagator(const Generator& gen) : space_(gen.space) {
  require_full_domain(gen);
  sym_ = gen.space.sqrt_weights().asDiagonal() * gen.action.dense() *
         gen.space.inv_sqrt_weights().asDiagonal();
}

Matrix ExactPropagator::matrix(double t) const {
  const Matrix e = (t * sym_).exp();
  return space_.inv_sqrt_weights().asDiagonal() * e * space_.sqrt_weights().asDiagonal();
}

Vector ExactPropagator::apply(double t, const Vector& u) const {
  const Matrix e = (t * sym_).exp();
  return space_.inv_sqrt_weights().cwiseProduct(e * space_.sqrt_weights().cwiseProduct(u));
}

Trajectory evolve_exact(const Generator& gen, const Vector& u0,
                        const std::vector<double>& times) {
  if (u0.size() != gen.space.dim()) throw SpecError("initial datum has wrong length");
  check_times(times);
  const ExactPropagator prop(gen);
  Trajectory tr{gen.space, times, {}, {}, {}, {}};
  tr.meta.method = StepMethod::exact_exponential;
  tr.meta.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
  tr.meta.solver_tol = std::numeric_limits<double>::epsilon();
  tr.states.reserve(times.size());
  for (double t : times) {
    tr.states.push_back(t == 0.0 ? u0 : prop.apply(t, u0));
    tr.norms.push_back(norm(gen.space, tr.states.back()));
  }
  tr.step_norms = tr.norms;
  return tr;
}

struct CayleyStepper::Impl {
  bool sparse = false;
  Matrix rhs_dense;
  SparseMatrix rhs_sparse;
  SparseMatrix lhs_sparse;
  Matrix lhs_dense;
  Eigen::PartialPivLU<Matrix> dense_lu;
  Eigen::SparseLU<SparseMatrix> sparse_lu;
};

CayleyStepper::CayleyStepper(const Generator& gen, double dt)
    : impl_(std::make_unique<Impl>()), dt_(dt) {
  if (!(dt > 0.0)) throw SpecError("dt must be positive");
  require_full_domain(gen);
  const Index n = gen.space.dim();
  const double h = 0.5 * dt;
  if (gen.action.is_sparse()) {
    impl_->sparse = true;
    SparseMatrix id(n, n);
    id.setIdentity();
    const SparseMatrix b = gen.action.sparse();
    impl_->lhs_sparse = id - h * b;
    impl_->rhs_sparse = id + h * b;
    impl_->lhs_sparse.makeCompressed();
    impl_->sparse_lu.analyzePattern(impl_->lhs_sparse);
    impl_->sparse_lu.factorize(impl_->lhs_sparse);
    if (impl_->sparse_lu.info() != Eigen::Success) {
      throw SingularStepError("step matrix E - (dt/2)B is singular: " +
                              impl_->sparse_lu.lastErrorMessage());
    }
  } else {
    const Matrix b = gen.action.dense();
    impl_->lhs_dense = Matrix::Identity(n, n) - h * b;
    impl_->rhs_dense = Matrix::Identity(n, n) + h * b;
    impl_->dense_lu.compute(impl_->lhs_dense);
    if (!(impl_->dense_lu.rcond() > 1e-14)) {
      throw SingularStepError("step matrix E - (dt/2)B is singular");
    }
  }
}

CayleyStepper::~CayleyStepper() = default;
CayleyStepper::CayleyStepper(CayleyStepper&&) noexcept = default;
CayleyStepper& CayleyStepper::operator=(CayleyStepper&&) noexcept = default;

Vector CayleyStepper::step(const Vector& u) const {
  Vector r, x;
  if (impl_->sparse) {
    r = impl_->rhs_sparse * u;
    x = impl_->sparse_lu.solve(r);
  } else {
    r = impl_->rhs_dense * u;
    x = impl_->dense_lu.solve(r);
  }
  const double rn = r.norm();
  if (rn > 0.0) {
    const Vector res = impl_->sparse ? Vector(impl_->lhs_sparse * x - r)
                                     : Vector(impl_->lhs_dense * x - r);
    last_residual_ = res.norm() / rn;
  } else {
    last_residual_ = 0.0;
  }
  return x;
}

Trajectory evolve_cayley(const Generator& gen, const Vector& u0, double dt, Index nsteps,
                         Index stride) {
  if (u0.size() != gen.space.dim()) throw SpecError("initial datum has wrong length");
  if (nsteps < 0) throw SpecError("nsteps must be non-negative");
  if (stride < 1) throw SpecError("stride must be positive");
  const CayleyStepper stepper(gen, dt);
  Trajectory tr{gen.space, {0.0}, {u0}, {norm(gen.space, u0)}, {}, {}};
  tr.meta.method = StepMethod::cayley_step;
  tr.meta.dt = dt;
  tr.meta.stride = stride;
  tr.step_norms.reserve(static_cast<size_t>(nsteps + 1));
  tr.step_norms.push_back(tr.norms.front());
  Vector u = u0;
  double worst = 0.0;
  for (Index k = 1; k <= nsteps; ++k) {
    u = stepper.step(u);
    worst = std::max(worst, stepper.last_residual());
    const double nu = norm(gen.space, u);
    tr.step_norms.push_back(nu);
    if (k % stride == 0 || k == nsteps) {
      tr.times.push_back(static_cast<double>(k) * dt);
      tr.states.push_back(u);
      tr.norms.push_back(nu);
    }
  }
  tr.meta.solver_tol = worst;
  return tr;
}

Generator adjoint_generator(const Generator& gen) {
  const Vector& w = gen.space.weights();
  LinearMap adj = gen.action.transposed().diag_sandwich(w.cwiseInverse(), w);
  return Generator{gen.space, std::move(adj), gen.domain, "adjoint of " + gen.provenance};
}

Trajectory adjoint_trajectory(const Generator& gen, const Vector& u0,
                              const std::vector<double>& times) {
  require_full_domain(gen);
  return evolve_exact(adjoint_generator(gen), u0, times);
}

}  // namespace skewflow
