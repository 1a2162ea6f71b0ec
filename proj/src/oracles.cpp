#include "skewflow/oracles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "skewflow/error.hpp"
#include "skewflow/gs_verify.hpp"

namespace skewflow {

RestrictedOperator minimal_derivative_operator(Index n) {
  if (n < 8) throw SpecError("minimal_derivative_operator needs n >= 8");
  const double h = 1.0 / static_cast<double>(n - 1);
  Vector w = Vector::Constant(n, h);
  w(0) = w(n - 1) = 0.5 * h;
  Space space(w, "trapezoid[0,1] n=" + std::to_string(n));
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) {
    m(i, i + 1) = 0.5 / w(i);
    m(i + 1, i) = -0.5 / w(i + 1);
  }
  std::vector<Index> idx;
  for (Index i = 1; i + 1 < n; ++i) idx.push_back(i);
  SubspaceBasis dom = SubspaceBasis::coordinates(space, idx);
  return RestrictedOperator(space, LinearMap(std::move(m)), std::move(dom),
                            "minimal d/dx on [0,1], n=" + std::to_string(n));
}

Vector interval_nodes(Index n) {
  return Vector::LinSpaced(n, 0.0, 1.0);
}

Vector sample(const Vector& x, const ScalarFn& f) {
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out(i) = f(x(i));
  return out;
}

double interval_shift_value(double theta, double t, const ScalarFn& u0, double x) {
  const double y = x - t;
  const double k = std::floor(y);
  const double crossings = -k;  // k <= 0 for t >= 0 and x in [0,1)
  double factor = 1.0;
  if (crossings > 0) factor = std::pow(theta, crossings);
  return factor * u0(y - k);
}

Vector interval_shift_semigroup(double theta, double t, const ScalarFn& u0, const Vector& x) {
  if (std::abs(theta) > 1.0) throw SpecError("theta must lie in [-1, 1]");
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) out(i) = interval_shift_value(theta, t, u0, x(i));
  return out;
}

Vector interval_shift_semigroup(double theta, double t, const Vector& u0_samples) {
  const Index n = u0_samples.size();
  if (n < 2) throw SpecError("need at least two samples");
  const double h = 1.0 / static_cast<double>(n - 1);
  auto u0 = [&](double y) {
    const double s = std::clamp(y / h, 0.0, static_cast<double>(n - 1));
    const Index i = std::min<Index>(static_cast<Index>(s), n - 2);
    const double f = s - static_cast<double>(i);
    return (1.0 - f) * u0_samples(i) + f * u0_samples(i + 1);
  };
  return interval_shift_semigroup(theta, t, u0, interval_nodes(n));
}

OracleCase interval_case(double theta) {
  if (std::abs(theta) > 1.0) throw SpecError("theta must lie in [-1, 1]");
  OracleCase c;
  c.name = OracleName::interval_theta;
  c.label = "interval_theta";
  c.theta = theta;
  c.sign = 1;
  c.a = 0.0;
  c.b = 1.0;
  c.d_plus = 0;
  c.d_minus = 0;
  c.semigroup = [theta](double t, const ScalarFn& u0, double x) {
    return interval_shift_value(theta, t, u0, x);
  };
  return c;
}

OracleCase interval_minimal_case() {
  OracleCase c = interval_case(0.0);
  c.name = OracleName::interval_minimal;
  c.label = "interval_minimal";
  c.d_plus = 1;
  c.d_minus = 1;
  // N_plus = ker(E + A*) with A* = -d/dx: e^x. N_minus = ker(E - A*): e^{-x}.
  const double cp = std::sqrt(2.0 / (std::exp(2.0) - 1.0));
  const double cm = std::sqrt(2.0 / (1.0 - std::exp(-2.0)));
  c.n_plus = [cp](double x) { return cp * std::exp(x); };
  c.n_minus = [cm](double x) { return cm * std::exp(-x); };
  return c;
}

OracleCase halfline_case(HalfLine side) {
  // A_0 = -d/dx, so A* = d/dx and the semigroups are left shifts.
  OracleCase c;
  c.sign = -1;
  const double inf = std::numeric_limits<double>::infinity();
  const double r2 = std::sqrt(2.0);
  if (side == HalfLine::right) {
    c.name = OracleName::halfline_right;
    c.label = "halfline_right";
    c.a = 0.0;
    c.b = inf;
    c.d_plus = 1;  // ker(E + d/dx) = e^{-x}, square integrable on (0, inf)
    c.d_minus = 0; // ker(E - d/dx) = e^{x}, not square integrable
    c.n_plus = [r2](double x) { return r2 * std::exp(-x); };
    // Mass leaves through x = 0; nothing enters. Contraction, isometric adjoint.
    c.semigroup = [](double t, const ScalarFn& u0, double x) { return u0(x + t); };
  } else {
    c.name = OracleName::halfline_left;
    c.label = "halfline_left";
    c.a = -inf;
    c.b = 0.0;
    c.d_plus = 0;
    c.d_minus = 1;
    c.n_minus = [r2](double x) { return r2 * std::exp(x); };
    // Zero fill entering at x = 0: isometric.
    c.semigroup = [](double t, const ScalarFn& u0, double x) {
      return x + t < 0.0 ? u0(x + t) : 0.0;
    };
  }
  return c;
}

namespace {

using boost::math::quadrature::gauss_kronrod;

double integrate(const std::function<double(double)>& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

struct Bump {
  double c, r;
  double value(double x) const {
    const double s = (x - c) / r;
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    return q * q;
  }
  double derivative(double x) const {
    const double s = (x - c) / r;
    if (std::abs(s) >= 1.0) return 0.0;
    return -4.0 * s * (1.0 - s * s) / r;
  }
};

std::vector<Bump> bumps_inside(double a, double b) {
  // Work on a finite window next to the finite endpoint.
  double lo = a, hi = b;
  if (!std::isfinite(lo)) lo = hi - 4.0;
  if (!std::isfinite(hi)) hi = lo + 4.0;
  const double len = hi - lo;
  std::vector<Bump> out;
  for (double f : {0.15, 0.35, 0.55, 0.8}) out.push_back({lo + f * len, 0.08 * len});
  return out;
}

}  // namespace

ContinuumCheck continuum_exp_witness_check(const OracleCase& c, const ScalarFn& u0, double T,
                                           double tol) {
  ContinuumCheck out;
  out.u0_norm = std::sqrt(integrate([&](double x) { return u0(x) * u0(x); }, c.a, c.b));
  const auto profiles = default_profiles(T);
  // Time factors of the separable residual for u(t) = e^t u0:
  //   R = (u0,psi) [int e^t phi' + phi(0)] + (u0, A psi) int e^t phi.
  for (const Bump& b : bumps_inside(c.a, c.b)) {
    const double lo = b.c - b.r, hi = b.c + b.r;
    const double u0psi = integrate([&](double x) { return u0(x) * b.value(x); }, lo, hi);
    const double u0apsi = static_cast<double>(c.sign) *
                          integrate([&](double x) { return u0(x) * b.derivative(x); }, lo, hi);
    const double psi2 = integrate([&](double x) { return b.value(x) * b.value(x); }, lo, hi);
    const double apsi2 = integrate([&](double x) { return b.derivative(x) * b.derivative(x); }, lo, hi);
    for (const TemporalProfile& p : profiles) {
      const double end = p.support_end();
      double i1 = 0.0, i2 = 0.0;
      // Split at the kinks of the cutoff profiles so the rule sees smooth pieces.
      std::vector<double> cuts{0.0};
      if (p.kind == ProfileKind::mollified_cutoff) {
        const double start = p.p1 - 1.0 / p.p2;
        if (start > 0.0) cuts.push_back(start);
      }
      cuts.push_back(end);
      for (size_t k = 0; k + 1 < cuts.size(); ++k) {
        i1 += integrate([&](double t) { return std::exp(t) * p.derivative(t); }, cuts[k], cuts[k + 1]);
        i2 += integrate([&](double t) { return std::exp(t) * p.value(t); }, cuts[k], cuts[k + 1]);
      }
      const double res = u0psi * (i1 + p.value(0.0)) + u0apsi * i2;
      double fnorm = 0.0;
      for (int k = 0; k <= 2000; ++k) {
        const double t = T * k / 2000.0;
        const double ph = p.value(t), dph = p.derivative(t);
        fnorm = std::max(fnorm, ph * ph * (psi2 + apsi2) + dph * dph * psi2);
      }
      const double rel = std::abs(res) / (out.u0_norm * std::sqrt(fnorm));
      out.residuals.push_back(rel);
      out.max_residual = std::max(out.max_residual, rel);
    }
  }
  out.pass = out.max_residual <= tol;
  return out;
}

}  // namespace skewflow
