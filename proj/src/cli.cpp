#include "skewflow/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "skewflow/error.hpp"
#include "skewflow/gs_verify.hpp"
#include "skewflow/oracles.hpp"

namespace skewflow {

namespace fs = std::filesystem;
using JsonIn = nlohmann::json;

void validate(const RunConfig& cfg) {
  static const std::vector<std::string> commands{"analyze", "extend", "evolve", "verify",
                                                 "witness", "multiplicity", "transport-run",
                                                 "oracle-check"};
  if (std::find(commands.begin(), commands.end(), cfg.command) == commands.end()) {
    throw SpecError("unknown command '" + cfg.command + "'");
  }
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw SpecError(std::string(name) + " must be positive");
  };
  positive(cfg.rank_tol, "--rank-tol");
  positive(cfg.skew_tol, "--skew-tol");
  positive(cfg.gs_tol, "--gs-tol");
  positive(cfg.solver_tol, "--solver-tol");
  positive(cfg.dt, "--dt");
  positive(cfg.horizon, "--horizon");
  if (cfg.stride < 1) throw SpecError("--stride must be positive");
  if (cfg.method != "cayley" && cfg.method != "exact") {
    throw SpecError("--method must be 'exact' or 'cayley'");
  }
  if (cfg.theta && std::abs(*cfg.theta) > 1.0) throw SpecError("--theta must lie in [-1, 1]");
  if (!(cfg.t0 >= 0.0)) throw SpecError("--t0 must be non-negative");
}

namespace {

// Schema errors: JSON path plus the line of the key when it can be found.
class Schema {
 public:
  Schema(std::string path, std::string text) : path_(std::move(path)), text_(std::move(text)) {}

  [[noreturn]] void fail(const std::string& where, const std::string& msg) const {
    // Array indices are not searchable; use the nearest named key above them.
    std::string key;
    std::stringstream parts(where);
    for (std::string seg; std::getline(parts, seg, '/');) {
      if (!seg.empty() && !std::all_of(seg.begin(), seg.end(), ::isdigit)) key = seg;
    }
    std::string loc = path_;
    const size_t pos = key.empty() ? std::string::npos : text_.find("\"" + key + "\"");
    if (pos != std::string::npos) {
      loc += ":" + std::to_string(1 + std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
    }
    throw SpecError(loc + ": " + where + ": " + msg);
  }

  const JsonIn& at(const JsonIn& obj, const std::string& where, const std::string& key) const {
    if (!obj.is_object() || !obj.contains(key)) fail(where + "/" + key, "missing required field");
    return obj.at(key);
  }

  double number(const JsonIn& v, const std::string& where) const {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
  }

  Index integer(const JsonIn& v, const std::string& where) const {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<Index>();
  }

  std::string string(const JsonIn& v, const std::string& where) const {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
  }

  Vector vector(const JsonIn& v, const std::string& where) const {
    if (!v.is_array()) fail(where, "expected an array of numbers");
    Vector out(static_cast<Index>(v.size()));
    for (size_t k = 0; k < v.size(); ++k) out(static_cast<Index>(k)) = number(v[k], where + "/" + std::to_string(k));
    return out;
  }

  Matrix rows(const JsonIn& v, const std::string& where) const {
    if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array of rows");
    const Index r = static_cast<Index>(v.size());
    Index c = -1;
    Matrix out;
    for (Index i = 0; i < r; ++i) {
      const Vector row = vector(v[static_cast<size_t>(i)], where + "/" + std::to_string(i));
      if (c < 0) {
        c = row.size();
        out.resize(r, c);
      } else if (row.size() != c) {
        fail(where + "/" + std::to_string(i), "row length " + std::to_string(row.size()) +
                                                  " differs from " + std::to_string(c));
      }
      out.row(i) = row.transpose();
    }
    return out;
  }

 private:
  std::string path_;
  std::string text_;
};

Vector gaussian_nodes(const Vector& x, double c, double w) {
  return sample(x, [&](double y) { return std::exp(-std::pow((y - c) / w, 2)); });
}

}  // namespace

LoadedSpec parse_operator_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  JsonIn j;
  try {
    j = JsonIn::parse(text);
  } catch (const JsonIn::parse_error& e) {
    throw SpecError(path + ": " + e.what());
  }
  const Schema sc(path, text);
  if (!j.is_object()) sc.fail("", "top level must be an object");
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base / p).string(); };

  LoadedSpec spec;
  if (j.contains("oracle")) {
    const JsonIn& o = j["oracle"];
    spec.oracle = sc.string(sc.at(o, "/oracle", "case"), "/oracle/case");
    if (o.contains("theta")) spec.oracle_theta = sc.number(o["theta"], "/oracle/theta");
    if (o.contains("n")) spec.kind = std::to_string(sc.integer(o["n"], "/oracle/n"));
    if (!j.contains("operator")) return spec;
  }

  const JsonIn& oj = sc.at(j, "", "operator");
  spec.kind = sc.string(sc.at(oj, "/operator", "kind"), "/operator/kind");
  const JsonIn dj = j.value("domain", JsonIn::object());
  const std::string dmode = dj.contains("mode") ? sc.string(dj["mode"], "/domain/mode") : "";
  std::optional<Space> space;
  LinearMap action;
  std::optional<SubspaceBasis> domain;

  if (spec.kind == "matrix") {
    const JsonIn& data = sc.at(oj, "/operator", "data");
    Matrix m;
    if (data.is_array() && !data.empty() && data[0].is_array()) {
      m = sc.rows(data, "/operator/data");
    } else {
      const Index r = sc.integer(sc.at(oj, "/operator", "rows"), "/operator/rows");
      const Index c = sc.integer(sc.at(oj, "/operator", "cols"), "/operator/cols");
      const Vector flat = sc.vector(data, "/operator/data");
      if (flat.size() != r * c) sc.fail("/operator/data", "expected rows*cols entries");
      m = Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>>(flat.data(), r, c);
    }
    if (m.rows() != m.cols()) sc.fail("/operator/data", "matrix must be square");
    if (oj.contains("rows") && data[0].is_array() &&
        sc.integer(oj["rows"], "/operator/rows") != m.rows()) {
      sc.fail("/operator/rows", "does not match the data");
    }
    Vector w = Vector::Ones(m.rows());
    if (j.contains("space") && j["space"].contains("weights")) {
      w = sc.vector(j["space"]["weights"], "/space/weights");
      if (w.size() != m.rows()) sc.fail("/space/weights", "length does not match the matrix");
      for (Index i = 0; i < w.size(); ++i) {
        if (!(w(i) > 0.0)) sc.fail("/space/weights", "weights must be positive");
      }
    }
    space = Space(w, "matrix space");
    action = LinearMap(m);
  } else if (spec.kind == "minimal_derivative") {
    const Index n = sc.integer(sc.at(oj, "/operator", "n"), "/operator/n");
    if (n < 8) sc.fail("/operator/n", "needs n >= 8");
    RestrictedOperator op = minimal_derivative_operator(n);
    space = op.space;
    action = op.action;
    domain = op.domain;
  } else if (spec.kind == "transport") {
    SolenoidalField field;
    Grid g;
    g.nx = oj.contains("nx") ? sc.integer(oj["nx"], "/operator/nx") : 0;
    g.ny = oj.contains("ny") ? sc.integer(oj["ny"], "/operator/ny") : 0;
    g.lx = oj.contains("lx") ? sc.number(oj["lx"], "/operator/lx") : 1.0;
    g.ly = oj.contains("ly") ? sc.number(oj["ly"], "/operator/ly") : 1.0;
    if (oj.contains("rotation")) {
      field = rotation_field(sc.integer(oj["rotation"], "/operator/rotation"));
    } else if (oj.contains("field")) {
      field = load_field_file(resolve(sc.string(oj["field"], "/operator/field")));
    } else if (oj.contains("stream")) {
      const std::string sp = resolve(sc.string(oj["stream"], "/operator/stream"));
      Index rows = 0, cols = 0;
      const Vector psi = read_stream_csv(sp, rows, cols);
      if (g.nx == 0 || g.ny == 0) {
        g.nx = cols;
        g.ny = rows;
      }
      field = field_from_stream(g, psi);
    } else if (oj.contains("psi")) {
      if (g.nx == 0 || g.ny == 0) sc.fail("/operator/nx", "inline psi needs nx and ny");
      field = field_from_stream(g, sc.vector(oj["psi"], "/operator/psi"));
    } else if (oj.contains("uniform")) {
      if (g.nx == 0 || g.ny == 0) sc.fail("/operator/nx", "uniform field needs nx and ny");
      const Vector a = sc.vector(oj["uniform"], "/operator/uniform");
      if (a.size() != 2) sc.fail("/operator/uniform", "expected [ax, ay]");
      field = uniform_field(g, a(0), a(1));
    } else {
      sc.fail("/operator/stream", "transport needs one of stream, field, psi, uniform, rotation");
    }
    std::string mode = oj.contains("mode") ? sc.string(oj["mode"], "/operator/mode") : "periodic_full";
    if (dmode == "interior") mode = "interior_domain";
    if (mode != "periodic_full" && mode != "interior_domain") {
      sc.fail("/operator/mode", "expected periodic_full or interior_domain");
    }
    RestrictedOperator op = build_transport_operator(
        field, mode == "periodic_full" ? TransportMode::periodic_full : TransportMode::interior_domain);
    space = op.space;
    action = op.action;
    domain = op.domain;
    spec.field = field;
  } else {
    sc.fail("/operator/kind", "unknown kind '" + spec.kind + "' (matrix, minimal_derivative, transport)");
  }

  if (dmode == "full") {
    domain = SubspaceBasis::whole(*space);
  } else if (dmode == "indices") {
    const JsonIn& idx = sc.at(dj, "/domain", "indices");
    std::vector<Index> ids;
    for (size_t k = 0; k < idx.size(); ++k) {
      const Index i = sc.integer(idx[k], "/domain/indices/" + std::to_string(k));
      if (i < 0 || i >= space->dim()) sc.fail("/domain/indices", "index out of range");
      ids.push_back(i);
    }
    domain = SubspaceBasis::coordinates(*space, ids);
  } else if (dmode == "vectors") {
    const Matrix rows = sc.rows(sc.at(dj, "/domain", "vectors"), "/domain/vectors");
    if (rows.cols() != space->dim()) sc.fail("/domain/vectors", "vector length does not match the space");
    domain = SubspaceBasis(*space, Matrix(rows.transpose()));
  } else if (dmode == "interior" || dmode == "minimal" || dmode.empty()) {
    if (!domain) domain = SubspaceBasis::whole(*space);
  } else {
    sc.fail("/domain/mode", "unknown mode '" + dmode + "'");
  }
  spec.op.emplace(*space, action, *domain, spec.kind);

  const Index n = space->dim();
  const JsonIn ij = j.value("initial", JsonIn::object());
  const std::string ikind = ij.contains("kind") ? sc.string(ij["kind"], "/initial/kind") : "";
  if (ikind == "values") {
    spec.u0 = sc.vector(sc.at(ij, "/initial", "values"), "/initial/values");
    if (spec.u0.size() != n) sc.fail("/initial/values", "length does not match the space");
  } else if (ikind == "unit") {
    const Index k = ij.contains("index") ? sc.integer(ij["index"], "/initial/index") : 0;
    if (k < 0 || k >= n) sc.fail("/initial/index", "out of range");
    spec.u0 = Vector::Unit(n, k);
  } else if (ikind == "gaussian" || (ikind.empty() && spec.kind == "minimal_derivative")) {
    const double w = ij.contains("width") ? sc.number(ij["width"], "/initial/width") : 0.15;
    if (spec.field) {
      const double cx = ij.contains("cx") ? sc.number(ij["cx"], "/initial/cx") : 0.65 * spec.field->grid.lx;
      const double cy = ij.contains("cy") ? sc.number(ij["cy"], "/initial/cy") : 0.5 * spec.field->grid.ly;
      spec.u0 = sample_cells(spec.field->grid, [&](double x, double y) {
        return std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (w * w));
      });
    } else if (spec.kind == "minimal_derivative") {
      const double c = ij.contains("center") ? sc.number(ij["center"], "/initial/center") : 0.5;
      spec.u0 = gaussian_nodes(interval_nodes(n), c, w);
    } else {
      sc.fail("/initial/kind", "gaussian needs a grid operator");
    }
  } else if (ikind == "blob" || (ikind.empty() && spec.field)) {
    if (!spec.field) sc.fail("/initial/kind", "blob needs a transport operator");
    const Grid& g = spec.field->grid;
    spec.u0 = sample_cells(g, [&](double x, double y) { return rotation_blob(x / g.lx, y / g.ly); });
  } else if (ikind.empty()) {
    spec.u0 = Vector::Unit(n, 0);
  } else {
    sc.fail("/initial/kind", "unknown kind '" + ikind + "' (gaussian, values, unit, blob)");
  }

  if (j.contains("extension")) {
    const JsonIn& ej = j["extension"];
    spec.extension_V = sc.rows(sc.at(ej, "/extension", "V"), "/extension/V");
    if (ej.contains("kind")) {
      spec.extension_kind = sc.string(ej["kind"], "/extension/kind");
      if (spec.extension_kind != "skew_symmetric" && spec.extension_kind != "dissipative_contraction") {
        sc.fail("/extension/kind", "expected skew_symmetric or dissipative_contraction");
      }
    }
  }
  return spec;
}

namespace {

struct Context {
  const RunConfig& cfg;
  std::ostream& log;
  Json report;
  fs::path out;
  bool pass = true;

  void check(const char* name, bool ok) {
    report["checks"][name] = ok;
    if (!ok) pass = false;
  }
};

const RestrictedOperator& need_op(const LoadedSpec& spec) {
  if (!spec.op) throw SpecError("this command needs an \"operator\" section");
  return *spec.op;
}

// -A itself when A has full domain; otherwise -A~ for the requested extension.
Generator make_generator(const LoadedSpec& spec, Context& ctx) {
  const RestrictedOperator& op = need_op(spec);
  const DeficiencyData def = deficiency(op, ctx.cfg.rank_tol);
  if (def.d_plus == 0 && def.d_minus == 0) {
    ctx.report["generator"] = Json{{"source", "operator is maximal"}};
    if (!op.full_domain()) throw ExtensionError("extension domain not dense");
    return negated(op, "-A");
  }
  ExtensionSpec es;
  std::string source;
  if (spec.extension_V) {
    es.V = *spec.extension_V;
    es.kind = spec.extension_kind == "skew_symmetric" ? ExtensionKind::skew_symmetric
                                                      : ExtensionKind::dissipative_contraction;
    source = "spec V";
  } else {
    const double theta = ctx.cfg.theta.value_or(1.0);
    es.V = reference_isometry(def.d_plus, theta);
    es.kind = std::abs(theta) == 1.0 ? ExtensionKind::skew_symmetric
                                     : ExtensionKind::dissipative_contraction;
    source = "theta * diag(1,-1,...)";
  }
  const RestrictedOperator ext = extend(op, def, es, ctx.cfg.rank_tol);
  ctx.report["generator"] = Json{{"source", source},
                                 {"d_plus", def.d_plus},
                                 {"d_minus", def.d_minus},
                                 {"theta", ctx.cfg.theta.value_or(1.0)}};
  return negated(ext, "-(extension)");
}

Trajectory evolve(const Generator& gen, const Vector& u0, const RunConfig& cfg) {
  const Index steps = std::max<Index>(1, static_cast<Index>(std::llround(cfg.horizon / cfg.dt)));
  if (cfg.method == "cayley") return evolve_cayley(gen, u0, cfg.dt, steps, cfg.stride);
  // Exact: propagate with exp(dt B) and keep every stride-th state.
  const Sampler s = semigroup_sampler(gen, u0);
  const Sampler::Grid g = s.grid(cfg.dt, steps + 1);
  Trajectory tr{gen.space, {}, {}, {}, {}, {}};
  tr.meta.method = StepMethod::exact_exponential;
  tr.meta.dt = cfg.dt;
  tr.meta.stride = cfg.stride;
  for (Index k = 0; k <= steps; ++k) {
    const double nk = norm(gen.space, g.states[static_cast<size_t>(k)]);
    tr.step_norms.push_back(nk);
    if (k % cfg.stride == 0 || k == steps) {
      tr.times.push_back(static_cast<double>(k) * cfg.dt);
      tr.states.push_back(g.states[static_cast<size_t>(k)]);
      tr.norms.push_back(nk);
    }
  }
  return tr;
}

bool non_increasing(const Trajectory& tr) {
  for (size_t k = 1; k < tr.step_norms.size(); ++k) {
    if (tr.step_norms[k] > tr.step_norms[k - 1] * (1.0 + 1e-12)) return false;
  }
  return true;
}

TestFunctionFamily family_for(const LoadedSpec& spec, double T, Index n_t) {
  const RestrictedOperator& op = need_op(spec);
  std::vector<Vector> spatial;
  if (spec.field) {
    const Grid& g = spec.field->grid;
    spatial = interior_bumps(op, g,
                             {{0.3 * g.lx, 0.3 * g.ly}, {0.7 * g.lx, 0.3 * g.ly},
                              {0.3 * g.lx, 0.7 * g.ly}, {0.7 * g.lx, 0.7 * g.ly}},
                             0.15 * std::min(g.lx, g.ly));
  } else {
    spatial = default_spatial_vectors(op, 4);
  }
  return make_family(op, std::move(spatial), default_profiles(T), T, n_t);
}

Index steps_for(const RunConfig& cfg) {
  return std::max<Index>(2, static_cast<Index>(std::llround(cfg.horizon / cfg.dt)));
}

double isometry_probe(const RestrictedOperator& op, std::uint64_t seed) {
  const SubspaceBasis ob = orthonormalize(op.domain);
  if (ob.size() == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vector x = Vector::Zero(op.dim());
    for (Index k = 0; k < ob.size(); ++k) x += g(rng) * ob.vector(k);
    const Vector mx = op.action.apply(x);
    worst = std::max(worst, std::abs(norm(op.space, x + mx) - norm(op.space, x - mx)) / norm(op.space, x));
  }
  return worst;
}

void cmd_analyze(const LoadedSpec& spec, Context& ctx) {
  const RestrictedOperator& op = need_op(spec);
  const SkewReport skew = check_skew_symmetry(op, ctx.cfg.skew_tol);
  ctx.report["skew"] = to_json(skew);
  ctx.check("skew_symmetry", skew.pass);
  if (!skew.pass) return;
  const DeficiencyData def = deficiency(op, ctx.cfg.rank_tol);
  ctx.report["d_plus"] = def.d_plus;
  ctx.report["d_minus"] = def.d_minus;
  ctx.report["deficiency"] = to_json(def);
  const double gap = isometry_probe(op, ctx.cfg.seed);
  ctx.report["cayley_isometry_gap"] = gap;
  ctx.check("cayley_isometry", gap <= ctx.cfg.solver_tol);
  if (def.d_plus + def.d_minus > 0) {
    Matrix cols(op.dim(), def.d_minus + def.d_plus);
    cols << def.n_minus.dense(), def.n_plus.dense();
    write_matrix_csv((ctx.out / "deficiency.csv").string(), cols);
  }
  ctx.log << "d_plus = " << def.d_plus << ", d_minus = " << def.d_minus
          << (def.ill_conditioned ? " (ill-conditioned deficiency)" : "") << "\n";
}

void cmd_extend(const LoadedSpec& spec, Context& ctx) {
  const RestrictedOperator& op = need_op(spec);
  const Generator gen = make_generator(spec, ctx);
  const RestrictedOperator ext(gen.space, gen.action.scaled(-1.0), gen.domain, "extension");
  const SkewReport skew = check_skew_symmetry(ext, ctx.cfg.skew_tol);
  const double restr = restriction_defect(ext, op);
  const DissipativityReport dis = check_m_dissipative(gen, {0.5, 1.0, 2.0}, ctx.cfg.skew_tol);
  const InclusionReport inc = check_inclusion_in_adjoint(gen, op, ctx.cfg.skew_tol);
  ctx.report["extension_skew"] = to_json(skew);
  ctx.report["restriction_defect"] = restr;
  ctx.report["m_dissipative"] = to_json(dis);
  ctx.report["inclusion_in_adjoint"] = to_json(inc);
  const bool skew_kind = !spec.extension_V ? std::abs(ctx.cfg.theta.value_or(1.0)) == 1.0
                                           : spec.extension_kind == "skew_symmetric";
  if (skew_kind) ctx.check("extension_skew", skew.pass);
  ctx.check("restriction", restr <= ctx.cfg.skew_tol);
  ctx.check("m_dissipative", dis.pass);
  ctx.check("inclusion_in_adjoint", inc.pass);
  if (ext.dim() <= 1024) write_matrix_csv((ctx.out / "extension.csv").string(), ext.action.dense());
}

void cmd_evolve(const LoadedSpec& spec, Context& ctx) {
  const Generator gen = make_generator(spec, ctx);
  const Trajectory tr = evolve(gen, spec.u0, ctx.cfg);
  ctx.report["trajectory"] = trajectory_summary(tr);
  ctx.check("contractive", non_increasing(tr));
  write_trajectory_csv((ctx.out / "trajectory.csv").string(), tr);
}

void cmd_verify(const LoadedSpec& spec, Context& ctx) {
  const Generator gen = make_generator(spec, ctx);
  const Trajectory tr = evolve(gen, spec.u0, ctx.cfg);
  ctx.report["trajectory"] = trajectory_summary(tr);
  const Index nt = steps_for(ctx.cfg);
  const GsReport rep = gs_residual(from_trajectory(tr), spec.u0, need_op(spec),
                                   family_for(spec, ctx.cfg.horizon, nt), ctx.cfg.gs_tol);
  ctx.report["gs"] = to_json(rep);
  ctx.check("gs_residual", rep.pass);
  write_matrix_csv((ctx.out / "residuals.csv").string(), rep.residuals);
}

void cmd_witness(const LoadedSpec& spec, Context& ctx) {
  const RestrictedOperator& op = need_op(spec);
  const Witness w = witness_nonuniqueness(op, ctx.cfg.rank_tol);
  const Index nt = steps_for(ctx.cfg);
  const TestFunctionFamily fam = family_for(spec, ctx.cfg.horizon, nt);
  const GsReport rw = gs_residual(w.exp_solution, w.u0, op, fam, ctx.cfg.gs_tol);
  const Generator gen = make_generator(spec, ctx);
  const Sampler sp = splice(w, gen, op, ctx.cfg.t0);
  const GsReport rs = gs_residual(sp, w.u0, op, fam, ctx.cfg.gs_tol);
  const Sampler semi = semigroup_sampler(gen, w.u0);
  const double t_cmp = std::min(1.0, ctx.cfg.horizon);
  ctx.report["d_minus"] = w.deficiency.d_minus;
  ctx.report["witness_gs"] = to_json(rw);
  ctx.report["splice_t0"] = ctx.cfg.t0;
  ctx.report["splice_gs"] = to_json(rs);
  ctx.report["distance_time"] = t_cmp;
  ctx.report["distance_exp_vs_semigroup"] = compare_solutions(w.exp_solution, semi, op.space, {t_cmp})[0];
  ctx.check("witness_residual", rw.pass);
  ctx.check("splice_residual", rs.pass);
  write_matrix_csv((ctx.out / "witness_u0.csv").string(), Matrix(w.u0));
}

void cmd_multiplicity(const LoadedSpec& spec, Context& ctx) {
  const RestrictedOperator& op = need_op(spec);
  const MultiplicityDemo demo =
      semigroup_multiplicity_demo(op, spec.u0, ctx.cfg.horizon, ctx.cfg.dt, ctx.cfg.rank_tol);
  const double n0 = norm(op.space, spec.u0);
  const Index nt = static_cast<Index>(demo.traj1.times.size()) - 1;
  const TestFunctionFamily fam = family_for(spec, demo.traj1.horizon(), nt);
  const GsReport r1 = gs_residual(from_trajectory(demo.traj1), spec.u0, op, fam, ctx.cfg.gs_tol);
  const GsReport r2 = gs_residual(from_trajectory(demo.traj2), spec.u0, op, fam, ctx.cfg.gs_tol);
  ctx.report["separation"] = demo.separation;
  ctx.report["separation_relative"] = demo.separation / n0;
  ctx.report["gs_plus"] = to_json(r1);
  ctx.report["gs_minus"] = to_json(r2);
  ctx.check("distinct_semigroups", demo.separation >= 0.1 * n0);
  ctx.check("residual_plus", r1.pass);
  ctx.check("residual_minus", r2.pass);
}

void cmd_transport(const LoadedSpec& spec, Context& ctx) {
  if (!spec.field) throw SpecError("transport-run needs a transport operator");
  const SolenoidalField& f = *spec.field;
  const RestrictedOperator& op = need_op(spec);
  const double amax = max_face_speed(f);
  const double div = discrete_divergence(f).cwiseAbs().maxCoeff();
  const double div_rel = amax > 0 ? div / amax : div;
  ctx.report["divergence_relative"] = div_rel;
  ctx.check("divergence_free", div_rel <= 1e-13);
  const SkewReport skew = check_skew_symmetry(op, ctx.cfg.skew_tol);
  ctx.report["skew"] = to_json(skew);
  ctx.check("skew_symmetry", skew.pass);
  // Evolution always uses the periodic (skew-adjoint) operator of the field.
  const RestrictedOperator full = build_transport_operator(f, TransportMode::periodic_full);
  const Trajectory tr = evolve(negated(full, "-(a.grad)"), spec.u0, ctx.cfg);
  const double n0 = norm(op.space, spec.u0);
  const Vector& w = op.space.weights();
  ctx.report["trajectory"] = trajectory_summary(tr);
  const double drift = std::abs(tr.norms.back() - n0) / n0;
  const double mass = std::abs(w.dot(tr.states.back()) - w.dot(spec.u0)) / w.dot(spec.u0.cwiseAbs());
  ctx.report["energy_drift"] = drift;
  ctx.report["mass_drift"] = mass;
  ctx.check("energy_conserved", drift <= 1e-10);
  const Index nt = static_cast<Index>(tr.times.size()) - 1;
  const GsReport rep = transport_gs_residual(from_trajectory(tr), spec.u0, op, f.grid,
                                             default_profiles(tr.horizon()), tr.horizon(),
                                             std::max<Index>(nt, 2), ctx.cfg.gs_tol);
  ctx.report["gs"] = to_json(rep);
  ctx.check("gs_residual", rep.pass);
  if (tr.states.front().size() <= 4096) write_trajectory_csv((ctx.out / "trajectory.csv").string(), tr);
}

void cmd_oracle(const LoadedSpec& spec, Context& ctx) {
  std::string name = spec.oracle.value_or("");
  if (name.empty() && spec.kind == "minimal_derivative") name = "interval_minimal";
  ctx.report["case"] = name;
  if (name == "halfline_left" || name == "halfline_right") {
    const OracleCase c = halfline_case(name == "halfline_left" ? HalfLine::left : HalfLine::right);
    ctx.report["d_plus"] = c.d_plus;
    ctx.report["d_minus"] = c.d_minus;
    ctx.report["operator_sign"] = c.sign;
    ctx.report["forward_unique"] = c.forward_unique();
    ctx.report["backward_unique"] = c.backward_unique();
    if (c.d_minus > 0) {
      const ContinuumCheck chk = continuum_exp_witness_check(c, c.n_minus, ctx.cfg.horizon, 1e-6);
      ctx.report["witness_norm"] = chk.u0_norm;
      ctx.report["witness_max_residual"] = chk.max_residual;
      ctx.check("witness_weak_identity", chk.pass);
    } else {
      // The N_plus vector is not a forward solution: e^t u0 must fail.
      const ContinuumCheck chk = continuum_exp_witness_check(c, c.n_plus, ctx.cfg.horizon, 1e-6);
      ctx.report["control_max_residual"] = chk.max_residual;
      ctx.check("control_rejected", !chk.pass);
    }
    return;
  }
  Index n = 128;
  if (spec.op && spec.kind == "minimal_derivative") n = spec.op->dim();
  else if (!spec.kind.empty() && std::all_of(spec.kind.begin(), spec.kind.end(), ::isdigit)) n = std::stol(spec.kind);
  const RestrictedOperator op = minimal_derivative_operator(n);
  const Vector x = interval_nodes(n);
  if (name == "interval_minimal") {
    const OracleCase c = interval_minimal_case();
    const DeficiencyData def = deficiency(op, ctx.cfg.rank_tol);
    const Vector em = sample(x, c.n_minus), ep = sample(x, c.n_plus);
    auto angle = [&](const Vector& a, const Vector& b) {
      return std::acos(std::min(1.0, std::abs(inner(op.space, a, b)) / (norm(op.space, a) * norm(op.space, b))));
    };
    const double am = def.d_minus ? angle(def.n_minus.vector(0), em) : M_PI / 2;
    const double ap = def.d_plus ? angle(def.n_plus.vector(0), ep) : M_PI / 2;
    ctx.report["n"] = n;
    ctx.report["analytic"] = Json{{"d_plus", c.d_plus}, {"d_minus", c.d_minus}};
    ctx.report["discrete"] = Json{{"d_plus", def.d_plus}, {"d_minus", def.d_minus}};
    ctx.report["angle_n_minus_vs_exp_minus_x"] = am;
    ctx.report["angle_n_plus_vs_exp_x"] = ap;
    ctx.check("deficiency_vectors_aligned", am <= 0.1 && ap <= 0.1);
    return;
  }
  if (name == "interval_theta") {
    const double theta = ctx.cfg.theta.value_or(spec.oracle_theta);
    if (std::abs(theta) != 1.0) throw SpecError("interval_theta discrete comparison needs theta = +1 or -1");
    const DeficiencyData def = deficiency(op, ctx.cfg.rank_tol);
    const RestrictedOperator ext = extend(op, def, {reference_isometry(def.d_plus, theta), ExtensionKind::skew_symmetric});
    auto g = [](double y) { return std::exp(-std::pow((y - 0.5) / 0.15, 2)); };
    const Vector u0 = sample(x, g);
    const Trajectory tr = evolve(negated(ext), u0, ctx.cfg);
    double err = 0.0;
    const double n0 = norm(op.space, u0);
    for (size_t k = 0; k < tr.times.size(); ++k) {
      err = std::max(err, norm(op.space, tr.states[k] - interval_shift_semigroup(theta, tr.times[k], g, x)) / n0);
    }
    ctx.report["n"] = n;
    ctx.report["theta"] = theta;
    ctx.report["max_relative_error"] = err;
    ctx.check("matches_shift_oracle", err <= 0.05);
    return;
  }
  throw SpecError("unknown oracle case '" + name +
                  "' (interval_minimal, interval_theta, halfline_right, halfline_left)");
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
  Json report;
  try {
    validate(cfg);
    if (cfg.input.empty()) throw SpecError("--input is required");
    const LoadedSpec spec = parse_operator_spec(cfg.input);
    fs::create_directories(cfg.output_dir);
    Context ctx{cfg, log, Json::object(), fs::path(cfg.output_dir)};
    ctx.report["command"] = cfg.command;
    ctx.report["input"] = fs::path(cfg.input).filename().string();
    ctx.report["seed"] = cfg.seed;
    if (spec.op) {
      ctx.report["operator"] = Json{{"kind", spec.kind},
                                    {"dim", spec.op->dim()},
                                    {"domain_dim", orthonormalize(spec.op->domain).size()}};
    }
    ctx.report["checks"] = Json::object();
    int code = 0;
    try {
      if (cfg.command == "analyze") cmd_analyze(spec, ctx);
      else if (cfg.command == "extend") cmd_extend(spec, ctx);
      else if (cfg.command == "evolve") cmd_evolve(spec, ctx);
      else if (cfg.command == "verify") cmd_verify(spec, ctx);
      else if (cfg.command == "witness") cmd_witness(spec, ctx);
      else if (cfg.command == "multiplicity") cmd_multiplicity(spec, ctx);
      else if (cfg.command == "transport-run") cmd_transport(spec, ctx);
      else cmd_oracle(spec, ctx);
      code = ctx.pass ? 0 : 2;
    } catch (const UniquenessError& e) {
      ctx.report["error"] = e.what();
      log << e.what() << "\n";
      code = 2;
    } catch (const ExtensionError& e) {
      ctx.report["error"] = e.what();
      log << e.what() << "\n";
      code = 2;
    } catch (const SingularStepError& e) {
      ctx.report["error"] = e.what();
      log << e.what() << "\n";
      code = 2;
    }
    ctx.report["pass"] = code == 0;
    write_file((ctx.out / "report.json").string(), dump_json(ctx.report));
    for (const auto& [name, ok] : ctx.report["checks"].items()) {
      log << (ok.get<bool>() ? "ok    " : "FAILED ") << name << "\n";
    }
    return code;
  } catch (const SpecError& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace skewflow
