#include "doctest.h"
#include "gen.hpp"
#include "skewflow/error.hpp"
#include "skewflow/gs_verify.hpp"
#include "skewflow/oracles.hpp"

using namespace skewflow;

namespace {
Generator reference_generator(const RestrictedOperator& op, double theta) {
  const DeficiencyData d = deficiency(op);
  return negated(extend(op, d, {reference_isometry(d.d_plus, theta), ExtensionKind::skew_symmetric}));
}

TestFunctionFamily family(const RestrictedOperator& op, double T, Index n_t) {
  return make_family(op, default_spatial_vectors(op, 4), default_profiles(T), T, n_t);
}
}  // namespace

TEST_CASE("profiles vanish at T and are smooth at the support end") {
  for (const TemporalProfile& p : default_profiles(2.0)) {
    CHECK(p.value(2.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(p.derivative(p.support_end())) < 1e-12);
    CHECK(p.value(0.0) > 0.0);
  }
  const TemporalProfile q = poly_spline(1.0);
  CHECK(q.value(0.5) == doctest::Approx(0.125));
  CHECK(q.derivative(0.5) == doctest::Approx(-0.75));
}

TEST_CASE("family rejects spatial vectors outside the domain") {
  const RestrictedOperator op = minimal_derivative_operator(16);
  CHECK_THROWS_AS(make_family(op, {Vector::Ones(16)}, default_profiles(1.0), 1.0, 10), SpecError);
  CHECK_THROWS_AS(make_family(op, default_spatial_vectors(op, 2), {poly_spline(2.0)}, 1.0, 10), SpecError);
}

TEST_CASE("semigroup solution passes, perturbed solution fails") {
  const RestrictedOperator op = minimal_derivative_operator(32);
  const Generator g = reference_generator(op, 1.0);
  const Vector u0 = sample(interval_nodes(32), [](double x) { return std::exp(-std::pow((x - 0.5) / 0.15, 2)); });
  const GsReport good = gs_residual(semigroup_sampler(g, u0), u0, op, family(op, 1.0, 1000), 1e-8);
  CHECK(good.pass);
  CHECK(good.max_residual < 1e-5);
  CHECK(good.max_residual <= 1e-8 + good.quadrature_error_estimate);
  const Sampler frozen([u0](double) { return u0; }, 1.0, "constant");
  const GsReport bad = gs_residual(frozen, u0, op, family(op, 1.0, 1000), 1e-8);
  CHECK_FALSE(bad.pass);
  CHECK(bad.max_residual > 1e-3);
}

TEST_CASE("witness exists for the minimal operator, not for a maximal one") {
  const RestrictedOperator op = minimal_derivative_operator(32);
  const Witness w = witness_nonuniqueness(op);
  CHECK(norm(op.space, w.u0) == doctest::Approx(1.0));
  const GsReport r = gs_residual(w.exp_solution, w.u0, op, family(op, 1.0, 2000), 1e-6);
  CHECK(r.pass);
  const Space s = Space::uniform(2);
  Matrix j(2, 2);
  j << 0, 1, -1, 0;
  CHECK_THROWS_WITH_AS(witness_nonuniqueness(RestrictedOperator(s, LinearMap(j), SubspaceBasis::whole(s))),
                       "forward problem unique (d_minus = 0)", UniquenessError);
}

TEST_CASE("property: splices at random times are generalized solutions") {
  const RestrictedOperator op = minimal_derivative_operator(24);
  const Witness w = witness_nonuniqueness(op);
  const Generator g = reference_generator(op, -1.0);
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> t0(0.0, 1.0);
  const TestFunctionFamily fam = family(op, 1.0, 2000);
  for (int trial = 0; trial < 4; ++trial) {
    const GsReport r = gs_residual(splice(w, g, op, t0(rng)), w.u0, op, fam, 1e-6);
    CHECK(r.pass);
  }
}

TEST_CASE("multiplicity: two extensions give different evolutions") {
  const RestrictedOperator op = minimal_derivative_operator(32);
  const Vector u0 = sample(interval_nodes(32), [](double x) { return std::exp(-std::pow((x - 0.8) / 0.1, 2)); });
  const MultiplicityDemo d = semigroup_multiplicity_demo(op, u0, 1.0, 2e-3);
  CHECK(d.separation > 0.1 * norm(op.space, u0));
  const Space s = Space::uniform(2);
  CHECK_THROWS_AS(semigroup_multiplicity_demo(
                      RestrictedOperator(s, LinearMap(Matrix::Zero(2, 2)), SubspaceBasis::whole(s)),
                      Vector::Ones(2), 1.0, 0.1),
                  UniquenessError);
}
