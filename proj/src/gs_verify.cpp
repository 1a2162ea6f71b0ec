#include "skewflow/gs_verify.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "skewflow/error.hpp"
#include "skewflow/parallel.hpp"

namespace skewflow {

double TemporalProfile::value(double t) const {
  if (kind == ProfileKind::poly_spline) {
    if (t >= p1) return 0.0;
    const double r = 1.0 - t / p1;
    return r * r * r;
  }
  const double r = std::clamp(-p2 * (t - p1), 0.0, 1.0);
  return r * r * (3.0 - 2.0 * r);
}

double TemporalProfile::derivative(double t) const {
  if (kind == ProfileKind::poly_spline) {
    if (t >= p1) return 0.0;
    const double r = 1.0 - t / p1;
    return -3.0 * r * r / p1;
  }
  const double r = -p2 * (t - p1);
  if (r <= 0.0 || r >= 1.0) return 0.0;
  return -p2 * 6.0 * r * (1.0 - r);
}

double TemporalProfile::support_end() const { return p1; }

std::string TemporalProfile::name() const {
  std::ostringstream os;
  os.precision(6);
  if (kind == ProfileKind::poly_spline) {
    os << "poly_spline(tau=" << p1 << ")";
  } else {
    os << "mollified_cutoff(t0=" << p1 << ",nu=" << p2 << ")";
  }
  return os.str();
}

TemporalProfile poly_spline(double tau) {
  if (!(tau > 0.0)) throw SpecError("poly_spline: tau must be positive");
  return TemporalProfile{ProfileKind::poly_spline, tau, 0.0};
}

TemporalProfile mollified_cutoff(double t0, double nu) {
  if (!(nu > 0.0)) throw SpecError("mollified_cutoff: nu must be positive");
  return TemporalProfile{ProfileKind::mollified_cutoff, t0, nu};
}

std::vector<TemporalProfile> default_profiles(double T) {
  std::vector<TemporalProfile> out;
  for (double f : {0.2, 0.4, 0.6, 0.8, 1.0}) out.push_back(poly_spline(f * T));
  for (double nu : {4.0, 16.0, 64.0}) out.push_back(mollified_cutoff(T, nu / T));
  return out;
}

double domain_distance(const RestrictedOperator& op, const Vector& v) {
  const double nv = norm(op.space, v);
  if (nv == 0.0) return 0.0;
  const SubspaceBasis ob = orthonormalize(op.domain);
  Vector proj = Vector::Zero(v.size());
  if (ob.is_coordinate()) {
    for (Index i : ob.indices()) proj(i) = v(i);
  } else if (ob.size() > 0) {
    const Matrix u = ob.dense();
    proj = u * (u.transpose() * op.space.weights().cwiseProduct(v));
  }
  return norm(op.space, v - proj) / nv;
}

TestFunctionFamily make_family(const RestrictedOperator& op, std::vector<Vector> spatial,
                               std::vector<TemporalProfile> profiles, double T, Index n_t) {
  if (!(T > 0.0)) throw SpecError("test family horizon T must be positive");
  if (n_t < 2) throw SpecError("test family needs n_t >= 2");
  for (const Vector& v : spatial) {
    if (v.size() != op.dim()) throw SpecError("spatial test vector has wrong length");
    const double dist = domain_distance(op, v);
    if (dist > 1e-10) {
      throw SpecError("spatial test vector is not in the operator domain (distance " +
                      std::to_string(dist) + ")");
    }
  }
  for (const TemporalProfile& p : profiles) {
    if (p.support_end() > T * (1.0 + 1e-12)) {
      throw SpecError("profile " + p.name() + " does not vanish at T");
    }
  }
  return TestFunctionFamily{std::move(spatial), std::move(profiles), T, n_t};
}

std::vector<Vector> default_spatial_vectors(const RestrictedOperator& op, Index count) {
  const Index n = op.dim();
  const SubspaceBasis ob = orthonormalize(op.domain);
  const double pi = std::acos(-1.0);
  std::vector<Vector> probes;
  for (Index j = 0; j < count; ++j) {
    Vector g(n);
    for (Index i = 0; i < n; ++i) {
      g(i) = std::sin(pi * static_cast<double>(j + 1) * (static_cast<double>(i) + 0.5) /
                      static_cast<double>(n));
    }
    Vector p = Vector::Zero(n);
    if (ob.is_coordinate()) {
      for (Index i : ob.indices()) p(i) = g(i);
    } else if (ob.size() > 0) {
      const Matrix u = ob.dense();
      p = u * (u.transpose() * op.space.weights().cwiseProduct(g));
    }
    probes.push_back(p);
  }
  const SubspaceBasis b = orthonormalize(SubspaceBasis(op.space, from_columns(probes, n)));
  return columns(b.dense());
}

Sampler::Sampler(PointFn point, double horizon, std::string label, GridFn grid)
    : point_(std::move(point)), grid_(std::move(grid)), horizon_(horizon), label_(std::move(label)) {}

Sampler::Grid Sampler::grid(double dt, Index count) const {
  if (grid_) return grid_(dt, count);
  Grid g;
  g.states.resize(static_cast<size_t>(count));
  parallel_for(0, count, [&](long k) {
    g.states[static_cast<size_t>(k)] = point_(static_cast<double>(k) * dt);
  });
  return g;
}

namespace {

Vector interpolate(const Trajectory& tr, double t) {
  const auto& ts = tr.times;
  if (t <= ts.front()) return tr.states.front();
  if (t >= ts.back()) return tr.states.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const size_t hi = static_cast<size_t>(it - ts.begin());
  const size_t lo = hi - 1;
  const double s = (t - ts[lo]) / (ts[hi] - ts[lo]);
  return (1.0 - s) * tr.states[lo] + s * tr.states[hi];
}

}  // namespace

Sampler from_trajectory(const Trajectory& tr) {
  auto shared = std::make_shared<Trajectory>(tr);
  auto point = [shared](double t) {
    if (t > shared->horizon() * (1.0 + 1e-12) + 1e-300) {
      throw SpecError("sample time beyond trajectory horizon");
    }
    return interpolate(*shared, t);
  };
  auto grid = [shared](double dt, Index count) {
    Sampler::Grid g;
    const auto& ts = shared->times;
    g.states.resize(static_cast<size_t>(count));
    // Exact hit when the request is an integer multiple of a uniform spacing.
    bool aligned = ts.size() >= 2;
    Index mult = 0;
    if (aligned) {
      const double s = ts[1] - ts[0];
      const double m = dt / s;
      mult = static_cast<Index>(std::llround(m));
      aligned = mult >= 1 && std::abs(m - static_cast<double>(mult)) <= 1e-9 * m &&
                (count - 1) * mult < static_cast<Index>(ts.size());
      for (size_t k = 1; aligned && k < ts.size(); ++k) {
        aligned = std::abs((ts[k] - ts[k - 1]) - s) <= 1e-9 * s;
      }
    }
    if (aligned) {
      for (Index k = 0; k < count; ++k) {
        g.states[static_cast<size_t>(k)] = shared->states[static_cast<size_t>(k * mult)];
      }
      return g;
    }
    parallel_for(0, count, [&](long k) {
      g.states[static_cast<size_t>(k)] = interpolate(*shared, static_cast<double>(k) * dt);
    });
    double worst = 0.0;
    for (size_t k = 1; k + 1 < shared->states.size(); ++k) {
      const Vector d2 = shared->states[k + 1] - 2.0 * shared->states[k] + shared->states[k - 1];
      worst = std::max(worst, norm(shared->space, d2));
    }
    g.interp_error = worst / 8.0;
    return g;
  };
  return Sampler(point, tr.horizon(), "trajectory(" + to_string(tr.meta.method) + ")", grid);
}

Sampler semigroup_sampler(const Generator& gen, const Vector& u0, double horizon) {
  auto prop = std::make_shared<ExactPropagator>(gen);
  auto point = [prop, u0](double t) { return prop->apply(t, u0); };
  auto grid = [prop, u0](double dt, Index count) {
    Sampler::Grid g;
    g.states.reserve(static_cast<size_t>(count));
    const Matrix step = prop->matrix(dt);
    Vector u = u0;
    for (Index k = 0; k < count; ++k) {
      g.states.push_back(u);
      u = step * u;
    }
    return g;
  };
  return Sampler(point, horizon, "semigroup(" + gen.provenance + ")", grid);
}

Sampler exp_sampler(const Vector& u0) {
  return Sampler([u0](double t) -> Vector { return std::exp(t) * u0; },
                 std::numeric_limits<double>::infinity(), "exp(t) u0");
}

GsReport gs_residual(const Sampler& candidate, const Vector& u0, const RestrictedOperator& op,
                     const TestFunctionFamily& family, double tol) {
  const double T = family.T;
  const Index nt = family.n_t;
  if (candidate.horizon() < T * (1.0 - 1e-12)) {
    throw SpecError("family T exceeds trajectory horizon");
  }
  if (u0.size() != op.dim()) throw SpecError("initial datum has wrong length");
  const Index nv = static_cast<Index>(family.spatial_vectors.size());
  const Index np = static_cast<Index>(family.profiles.size());
  const double dt = T / static_cast<double>(nt);
  const Vector& w = op.space.weights();

  // Columns [W v_j | W M v_j] turn each state into its pairings (u,v), (u,Mv).
  Matrix pair(op.dim(), 2 * nv);
  std::vector<double> v_norm2(static_cast<size_t>(nv)), mv_norm2(static_cast<size_t>(nv));
  std::vector<double> u0v(static_cast<size_t>(nv));
  for (Index j = 0; j < nv; ++j) {
    const Vector& v = family.spatial_vectors[static_cast<size_t>(j)];
    const Vector mv = op.action.apply(v);
    pair.col(j) = w.cwiseProduct(v);
    pair.col(nv + j) = w.cwiseProduct(mv);
    v_norm2[static_cast<size_t>(j)] = inner(op.space, v, v);
    mv_norm2[static_cast<size_t>(j)] = inner(op.space, mv, mv);
    u0v[static_cast<size_t>(j)] = inner(op.space, u0, v);
  }

  const Sampler::Grid grid = candidate.grid(dt, nt + 1);
  Matrix proj(nt + 1, 2 * nv);
  parallel_for(0, nt + 1, [&](long k) {
    proj.row(k) = (pair.transpose() * grid.states[static_cast<size_t>(k)]).transpose();
  });

  Matrix phi(nt + 1, np), dphi(nt + 1, np);
  for (Index k = 0; k <= nt; ++k) {
    const double t = static_cast<double>(k) * dt;
    for (Index p = 0; p < np; ++p) {
      phi(k, p) = family.profiles[static_cast<size_t>(p)].value(t);
      dphi(k, p) = family.profiles[static_cast<size_t>(p)].derivative(t);
    }
  }

  // Residual on every `stride`-th node.
  auto residual = [&](Index j, Index p, Index stride) {
    const double h = dt * static_cast<double>(stride);
    double acc = 0.0;
    for (Index k = 0; k + stride <= nt; k += stride) {
      const double a0 = proj(k, j), a1 = proj(k + stride, j);
      acc += 0.5 * (a0 + a1) * (phi(k + stride, p) - phi(k, p));
      acc += 0.5 * h * (proj(k, nv + j) * phi(k, p) + proj(k + stride, nv + j) * phi(k + stride, p));
    }
    return acc + u0v[static_cast<size_t>(j)] * phi(0, p);
  };

  const double u0n = std::max(norm(op.space, u0), 1e-300);
  GsReport rep;
  rep.T = T;
  rep.n_t = nt;
  rep.tol = tol;
  rep.candidate = candidate.label();
  rep.residuals = Matrix::Zero(nv, np);
  for (const auto& p : family.profiles) rep.profile_names.push_back(p.name());
  double richardson = 0.0;
  for (Index j = 0; j < nv; ++j) {
    for (Index p = 0; p < np; ++p) {
      double fnorm = 0.0;
      for (Index k = 0; k <= nt; ++k) {
        const double f2 = phi(k, p) * phi(k, p) *
                              (v_norm2[static_cast<size_t>(j)] + mv_norm2[static_cast<size_t>(j)]) +
                          dphi(k, p) * dphi(k, p) * v_norm2[static_cast<size_t>(j)];
        fnorm = std::max(fnorm, f2);
      }
      fnorm = std::sqrt(fnorm);
      const double scale = u0n * std::max(fnorm, 1e-300);
      const double r1 = residual(j, p, 1);
      rep.residuals(j, p) = std::abs(r1) / scale;
      if (nt % 2 == 0) {
        richardson = std::max(richardson, std::abs(r1 - residual(j, p, 2)) / 3.0 / scale);
      }
    }
  }
  rep.max_residual = rep.residuals.size() ? rep.residuals.maxCoeff() : 0.0;
  rep.quadrature_error_estimate =
      richardson + T * std::sqrt(2.0) * grid.interp_error / u0n;
  rep.pass = rep.max_residual <= tol + rep.quadrature_error_estimate;
  return rep;
}

Witness witness_nonuniqueness(const RestrictedOperator& op, double tol) {
  DeficiencyData def = deficiency(op, tol);
  if (def.d_minus == 0) throw UniquenessError("forward problem unique (d_minus = 0)");
  Vector u0 = def.n_minus.vector(0);
  return Witness{u0, exp_sampler(u0), std::move(def)};
}

Sampler splice(const Witness& witness, const Generator& gen, const RestrictedOperator& op,
               double t0) {
  if (!(t0 >= 0.0)) throw SpecError("splice time must be non-negative");
  require_full_domain(gen);
  const DissipativityReport dis = check_m_dissipative(gen, {}, 1e-8);
  if (!dis.quadratic_pass) throw SpecError("splice needs a dissipative generator");
  const SkewReport skew = check_skew_symmetry(op, 1.0);
  const InclusionReport inc = check_inclusion_in_adjoint(gen, op, 1e-8 * std::max(1.0, skew.scale));
  if (!inc.pass) {
    throw SpecError("splice needs a generator extending -A (inclusion defect " +
                    std::to_string(inc.max_defect) + ")");
  }
  auto prop = std::make_shared<ExactPropagator>(gen);
  const Vector u0 = witness.u0;
  auto point = [prop, u0, t0](double t) -> Vector {
    if (t <= t0) return std::exp(t) * u0;
    return std::exp(t0) * prop->apply(t - t0, u0);
  };
  auto grid = [prop, u0, t0](double dt, Index count) {
    Sampler::Grid g;
    g.states.reserve(static_cast<size_t>(count));
    Index k = 0;
    for (; k < count && static_cast<double>(k) * dt <= t0; ++k) {
      g.states.push_back(std::exp(static_cast<double>(k) * dt) * u0);
    }
    if (k < count) {
      const Matrix step = prop->matrix(dt);
      Vector u = std::exp(t0) * prop->apply(static_cast<double>(k) * dt - t0, u0);
      for (; k < count; ++k) {
        g.states.push_back(u);
        u = step * u;
      }
    }
    return g;
  };
  std::ostringstream label;
  label << "splice(t0=" << t0 << ")";
  return Sampler(point, std::numeric_limits<double>::infinity(), label.str(), grid);
}

MultiplicityDemo semigroup_multiplicity_demo(const RestrictedOperator& op, const Vector& u0,
                                             double horizon, double dt, double tol) {
  const DeficiencyData def = deficiency(op, tol);
  if (def.d_plus == 0 || def.d_minus == 0) {
    throw UniquenessError("semigroup unique (operator is maximal)");
  }
  RestrictedOperator e1 = extend(op, def, {reference_isometry(def.d_plus, 1.0), ExtensionKind::skew_symmetric}, tol);
  RestrictedOperator e2 = extend(op, def, {reference_isometry(def.d_plus, -1.0), ExtensionKind::skew_symmetric}, tol);
  const Index nsteps = static_cast<Index>(std::llround(horizon / dt));
  Trajectory t1 = evolve_cayley(negated(e1, "-(V=+ref)"), u0, dt, nsteps);
  Trajectory t2 = evolve_cayley(negated(e2, "-(V=-ref)"), u0, dt, nsteps);
  double sep = 0.0;
  for (size_t k = 0; k < t1.states.size(); ++k) {
    sep = std::max(sep, norm(op.space, t1.states[k] - t2.states[k]));
  }
  return MultiplicityDemo{std::move(e1), std::move(e2), std::move(t1), std::move(t2), sep};
}

std::vector<double> compare_solutions(const Sampler& a, const Sampler& b, const Space& space,
                                      const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(norm(space, a(t) - b(t)));
  return out;
}

}  // namespace skewflow
