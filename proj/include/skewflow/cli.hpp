#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "skewflow/operator_model.hpp"
#include "skewflow/report.hpp"
#include "skewflow/transport.hpp"

namespace skewflow {

struct RunConfig {
  std::string command;
  std::string input;
  std::string output_dir = ".";
  double rank_tol = 1e-8;
  double skew_tol = 1e-10;
  double gs_tol = 1e-5;
  double solver_tol = 1e-10;
  std::string method = "cayley";  // or "exact"
  double dt = 1e-3;
  double horizon = 2.0;
  Index stride = 1;
  std::uint64_t seed = 1;
  std::optional<double> theta;
  double t0 = 0.5;
};

// Throws SpecError on out-of-range values.
void validate(const RunConfig& cfg);

/// Operator spec file contents after parsing.
struct LoadedSpec {
  std::optional<RestrictedOperator> op;  // absent for oracle-only specs
  std::string kind;                      // matrix | minimal_derivative | transport
  std::optional<SolenoidalField> field;  // transport only
  std::optional<Matrix> extension_V;     // "extension": {"V": [[...]]}
  std::string extension_kind = "skew_symmetric";
  Vector u0;                             // initial datum (default per kind)
  std::optional<std::string> oracle;     // "oracle": {"case": ...}
  double oracle_theta = 1.0;
};

/// JSON schema:
///   {"space": {"weights": [...]}?,
///    "operator": {"kind": "matrix", "data": [[...], ...]}
///              | {"kind": "minimal_derivative", "n": 64}
///              | {"kind": "transport", "stream": "psi.csv" | "field": "f.json"
///                 | "rotation": n, "nx", "ny", "lx", "ly", "mode": ...},
///    "domain": {"mode": "full" | "interior" | "indices" | "vectors", ...}?,
///    "initial": {"kind": "gaussian" | "values" | "unit" | "blob", ...}?,
///    "extension": {"V": [[...]], "kind": ...}?}
/// Relative paths resolve against the spec file's directory. Errors name the
/// JSON path and, when it can be located, the line of the offending key.
LoadedSpec parse_operator_spec(const std::string& path);

/// Oracle-only specs ({"oracle": {"case": "halfline_left"}}) are accepted by
/// oracle-check without an operator section.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace skewflow
