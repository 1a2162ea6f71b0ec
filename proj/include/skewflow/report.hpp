#pragma once

#include <string>

#include "json.hpp"
#include "skewflow/gs_verify.hpp"
#include "skewflow/operator_model.hpp"
#include "skewflow/semigroup.hpp"
#include "skewflow/transport.hpp"

namespace skewflow {

using Json = nlohmann::ordered_json;

/// Serialises with every floating value printed as %.17g so that identical
/// runs give byte-identical files. Non-finite values become null.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const SkewReport& r);
Json to_json(const DeficiencyData& d);
Json to_json(const DissipativityReport& r);
Json to_json(const InclusionReport& r);
Json to_json(const GsReport& r);  // residual matrix row-major
Json to_json(const RotationResult& r);
Json trajectory_summary(const Trajectory& tr);

void write_file(const std::string& path, const std::string& text);
// Columns: t, norm, state components.
void write_trajectory_csv(const std::string& path, const Trajectory& tr);
void write_matrix_csv(const std::string& path, const Matrix& m);

}  // namespace skewflow
