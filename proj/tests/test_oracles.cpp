#include "doctest.h"
#include "skewflow/error.hpp"
#include "skewflow/oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

using namespace skewflow;

TEST_CASE("interval shift semigroup with boundary coupling") {
  const ScalarFn u0 = [](double x) { return x * x; };
  // Right translation; mass leaving at x = 1 re-enters at x = 0 scaled by theta.
  CHECK(interval_shift_value(1.0, 0.25, u0, 0.75) == doctest::Approx(0.25));
  CHECK(interval_shift_value(-1.0, 0.25, u0, 0.1) == doctest::Approx(-0.85 * 0.85));
  CHECK(interval_shift_value(0.5, 1.0, u0, 0.5) == doctest::Approx(0.125));
  CHECK_THROWS_AS(interval_case(1.5), SpecError);
}

TEST_CASE("theta = +-1 shifts are isometries, |theta| < 1 contracts") {
  const Vector x = interval_nodes(4001);
  const ScalarFn u0 = [](double y) { return std::sin(3 * y) + 2; };
  auto l2 = [&](const Vector& v) {
    double s = 0;
    for (Index i = 0; i + 1 < v.size(); ++i) s += 0.5 * (v(i) * v(i) + v(i + 1) * v(i + 1)) * (x(i + 1) - x(i));
    return std::sqrt(s);
  };
  const double n0 = l2(sample(x, u0));
  CHECK(l2(interval_shift_semigroup(1.0, 0.37, u0, x)) == doctest::Approx(n0).epsilon(1e-3));
  CHECK(l2(interval_shift_semigroup(-1.0, 1.6, u0, x)) == doctest::Approx(n0).epsilon(1e-3));
  CHECK(l2(interval_shift_semigroup(0.5, 1.0, u0, x)) < 0.6 * n0);
}

TEST_CASE("deficiency data of the analytic cases") {
  CHECK(interval_case(0.3).d_plus == 0);
  const OracleCase m = interval_minimal_case();
  CHECK(m.d_plus == 1);
  CHECK(m.d_minus == 1);
  const OracleCase r = halfline_case(HalfLine::right);
  const OracleCase l = halfline_case(HalfLine::left);
  CHECK(r.d_plus == 1);
  CHECK(r.d_minus == 0);
  CHECK(r.forward_unique());
  CHECK(l.d_plus == 0);
  CHECK(l.d_minus == 1);
  CHECK_FALSE(l.forward_unique());
}

TEST_CASE("deficiency vectors are normalised") {
  using boost::math::quadrature::gauss_kronrod;
  const OracleCase m = interval_minimal_case();
  auto sq = [](const ScalarFn& f) { return [f](double x) { return f(x) * f(x); }; };
  CHECK(gauss_kronrod<double, 31>::integrate(sq(m.n_plus), 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(gauss_kronrod<double, 31>::integrate(sq(m.n_minus), 0.0, 1.0) == doctest::Approx(1.0));
  const OracleCase l = halfline_case(HalfLine::left);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(gauss_kronrod<double, 31>::integrate(sq(l.n_minus), -inf, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("continuum witness: e^t N_minus passes on the left half-line only") {
  const OracleCase l = halfline_case(HalfLine::left);
  CHECK(continuum_exp_witness_check(l, l.n_minus, 2.0, 1e-6).pass);
  const OracleCase r = halfline_case(HalfLine::right);
  CHECK_FALSE(continuum_exp_witness_check(r, r.n_plus, 2.0, 1e-6).pass);
}
