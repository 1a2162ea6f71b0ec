#pragma once

#include <string>
#include <vector>

#include "skewflow/gs_verify.hpp"
#include "skewflow/operator_model.hpp"

namespace skewflow {

/// Periodic box [0,lx) x [0,ly) with nx x ny cells. Cell (i,j) has centre
/// ((i+1/2)dx, (j+1/2)dy); stream-function nodes sit at (i dx, j dy).
struct Grid {
  Index nx = 0, ny = 0;
  double lx = 1.0, ly = 1.0;

  double dx() const { return lx / static_cast<double>(nx); }
  double dy() const { return ly / static_cast<double>(ny); }
  double area() const { return dx() * dy(); }
  Index cells() const { return nx * ny; }
  Index cell(Index i, Index j) const { return j * nx + i; }
};

/// Face-normal velocities. ux(i,j) lives on the x-face at x = i dx between
/// cells (i-1,j) and (i,j); vy(i,j) on the y-face at y = j dy between cells
/// (i,j-1) and (i,j). Both arrays are nx*ny, indexed like cells.
struct SolenoidalField {
  Grid grid;
  Vector ux;
  Vector vy;
  std::string provenance;
};

/// psi has nx*ny periodic node samples, or (nx+1)*(ny+1) samples including
/// the closing row/column (which may carry a linear drift, e.g. psi = y for a
/// uniform flow). Row-major with x fastest: psi[j*(nx')+i].
SolenoidalField field_from_stream(const Grid& grid, const Vector& psi);

SolenoidalField uniform_field(const Grid& grid, double ax, double ay);

// Net outflow per cell divided by the area.
Vector discrete_divergence(const SolenoidalField& f);
double max_face_speed(const SolenoidalField& f);

enum class TransportMode { periodic_full, interior_domain };
std::string to_string(TransportMode m);

/// Skew flux form of u -> a . grad u: for every face with flux F (velocity
/// times face length, from cell a into cell b) the Gram form gets S_ab = F/2,
/// S_ba = -F/2; M = S / area. Exactly skew, and M 1 = 0 when div a = 0.
/// interior_domain keeps cells at index distance >= 2 from the box edge.
RestrictedOperator build_transport_operator(const SolenoidalField& field, TransportMode mode);

// Cell-centre samples of f(x, y).
Vector sample_cells(const Grid& grid, const std::function<double(double, double)>& f);

/// Normalised compactly supported bumps (1 - s^2)^2 in both directions,
/// centred at the given points with radius r, restricted to op.domain.
std::vector<Vector> interior_bumps(const RestrictedOperator& op, const Grid& grid,
                                   const std::vector<std::pair<double, double>>& centres,
                                   double radius);

/// gs_residual with spatial vectors = interior bumps (if none are supplied
/// in the family, a default set of four is used).
GsReport transport_gs_residual(const Sampler& candidate, const Vector& u0,
                               const RestrictedOperator& op, const Grid& grid,
                               const std::vector<TemporalProfile>& profiles, double T,
                               Index n_t, double tol);

/// Solid rotation about the box centre inside radius R = lx/2:
/// psi = -min(r^2, R^2)/2 (unit angular velocity, period 2 pi).
SolenoidalField rotation_field(Index n);
double rotation_blob(double x, double y);  // initial datum of the benchmark

struct RotationResult {
  Index n = 0;
  double dt = 0.0;
  Index steps = 0;
  double final_error = 0.0;   // ||u(T) - u0|| / ||u0||
  double energy_drift = 0.0;  // | ||u(T)|| - ||u0|| | / ||u0||
  double max_step_drift = 0.0;
  double mass_drift = 0.0;    // |sum area u(T) - sum area u0| / sum area |u0|
  double solver_tol = 0.0;
};

/// One revolution (T = 2 pi) with the Cayley stepper; nsteps = round(T/dt).
/// zero_field runs the same data with a = 0.
RotationResult rotation_benchmark(Index n, double dt, bool zero_field = false);

/// Field file: JSON header {"nx","ny","lx","ly","format":"csv"|"f64le",
/// "data": path (relative to the header)} or inline {"psi": [...]}.
/// Binary data is little-endian IEEE-754 float64.
SolenoidalField load_field_file(const std::string& path);
// Comma-separated rows (one row per y level, x fastest); '#' lines skipped.
Vector read_stream_csv(const std::string& path, Index& rows, Index& cols);
void write_field_file(const std::string& header_path, const Grid& grid, const Vector& psi,
                      const std::string& format);

}  // namespace skewflow
