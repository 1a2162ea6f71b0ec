#include "skewflow/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "skewflow/error.hpp"

namespace skewflow {

namespace {

std::string fmt_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(std::ostringstream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{" << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << "," << nl;
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        emit(os, it.value(), indent, depth + 1);
      }
      os << nl << close_pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool scalars = true;
      for (const auto& e : j) scalars = scalars && !e.is_structured();
      if (scalars) {
        os << "[";
        for (size_t k = 0; k < j.size(); ++k) {
          if (k) os << (indent > 0 ? ", " : ",");
          emit(os, j[k], indent, depth + 1);
        }
        os << "]";
        return;
      }
      os << "[" << nl;
      for (size_t k = 0; k < j.size(); ++k) {
        if (k) os << "," << nl;
        os << pad;
        emit(os, j[k], indent, depth + 1);
      }
      os << nl << close_pad << "]";
      return;
    }
    case Json::value_t::number_float:
      os << fmt_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

Json matrix_rows(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::ostringstream os;
  emit(os, j, indent, 0);
  os << "\n";
  return os.str();
}

Json to_json(const SkewReport& r) {
  return Json{{"max_defect", r.max_defect}, {"scale", r.scale}, {"tol", r.tol}, {"pass", r.pass}};
}

Json to_json(const DeficiencyData& d) {
  return Json{{"d_plus", d.d_plus},
              {"d_minus", d.d_minus},
              {"tol_used", d.tol_used},
              {"ill_conditioned", d.ill_conditioned},
              {"plus_gap", d.plus_gap},
              {"minus_gap", d.minus_gap}};
}

Json to_json(const DissipativityReport& r) {
  return Json{{"max_quadratic", r.max_quadratic},
              {"quadratic_exact", r.quadratic_exact},
              {"h_list", r.h_list},
              {"ranks", r.ranks},
              {"tol", r.tol},
              {"quadratic_pass", r.quadratic_pass},
              {"range_pass", r.range_pass},
              {"pass", r.pass}};
}

Json to_json(const InclusionReport& r) {
  return Json{{"max_defect", r.max_defect}, {"tol", r.tol}, {"pass", r.pass}};
}

Json to_json(const GsReport& r) {
  return Json{{"candidate", r.candidate},
              {"T", r.T},
              {"n_t", r.n_t},
              {"profiles", r.profile_names},
              {"residuals", matrix_rows(r.residuals)},
              {"max_residual", r.max_residual},
              {"quadrature_error_estimate", r.quadrature_error_estimate},
              {"tol", r.tol},
              {"pass", r.pass}};
}

Json to_json(const RotationResult& r) {
  return Json{{"n", r.n},
              {"dt", r.dt},
              {"steps", r.steps},
              {"final_error", r.final_error},
              {"energy_drift", r.energy_drift},
              {"max_step_drift", r.max_step_drift},
              {"mass_drift", r.mass_drift},
              {"solver_tol", r.solver_tol}};
}

Json trajectory_summary(const Trajectory& tr) {
  double max_increase = 0.0;
  for (size_t k = 1; k < tr.step_norms.size(); ++k) {
    max_increase = std::max(max_increase, tr.step_norms[k] - tr.step_norms[k - 1]);
  }
  return Json{{"method", to_string(tr.meta.method)},
              {"dt", tr.meta.dt},
              {"stride", tr.meta.stride},
              {"solver_tol", tr.meta.solver_tol},
              {"samples", tr.times.size()},
              {"horizon", tr.horizon()},
              {"initial_norm", tr.norms.empty() ? 0.0 : tr.norms.front()},
              {"final_norm", tr.norms.empty() ? 0.0 : tr.norms.back()},
              {"max_step_norm_increase", max_increase}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SpecError("cannot write " + path);
  out << text;
}

void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  std::ostringstream os;
  os << "t,norm";
  const Index n = tr.states.empty() ? 0 : tr.states.front().size();
  for (Index i = 0; i < n; ++i) os << ",u" << i;
  os << "\n";
  for (size_t k = 0; k < tr.states.size(); ++k) {
    os << fmt_double(tr.times[k]) << "," << fmt_double(tr.norms[k]);
    for (Index i = 0; i < n; ++i) os << "," << fmt_double(tr.states[k](i));
    os << "\n";
  }
  write_file(path, os.str());
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ostringstream os;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = 0; k < m.cols(); ++k) os << (k ? "," : "") << fmt_double(m(i, k));
    os << "\n";
  }
  write_file(path, os.str());
}

}  // namespace skewflow
