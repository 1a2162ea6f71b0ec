#include "skewflow/transport.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "skewflow/error.hpp"
#include "skewflow/semigroup.hpp"

namespace skewflow {

namespace {

void check_grid(const Grid& g) {
  if (g.nx < 1 || g.ny < 1) throw SpecError("grid needs nx, ny >= 1");
  if (!(g.lx > 0.0) || !(g.ly > 0.0)) throw SpecError("grid box lengths must be positive");
}

}  // namespace

SolenoidalField field_from_stream(const Grid& grid, const Vector& psi) {
  check_grid(grid);
  const Index nx = grid.nx, ny = grid.ny;
  bool closed;
  if (psi.size() == nx * ny) {
    closed = false;
  } else if (psi.size() == (nx + 1) * (ny + 1)) {
    closed = true;
  } else {
    throw SpecError("stream function has " + std::to_string(psi.size()) +
                    " samples; expected nx*ny or (nx+1)*(ny+1)");
  }
  auto p = [&](Index i, Index j) {
    if (closed) return psi(j * (nx + 1) + i);
    return psi((j % ny) * nx + (i % nx));
  };
  SolenoidalField f{grid, Vector(nx * ny), Vector(nx * ny), closed ? "stream(closed)" : "stream"};
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      f.ux(grid.cell(i, j)) = (p(i, j + 1) - p(i, j)) / grid.dy();
      f.vy(grid.cell(i, j)) = -(p(i + 1, j) - p(i, j)) / grid.dx();
    }
  }
  return f;
}

SolenoidalField uniform_field(const Grid& grid, double ax, double ay) {
  check_grid(grid);
  return SolenoidalField{grid, Vector::Constant(grid.cells(), ax),
                         Vector::Constant(grid.cells(), ay), "uniform"};
}

Vector discrete_divergence(const SolenoidalField& f) {
  const Grid& g = f.grid;
  Vector div(g.cells());
  for (Index j = 0; j < g.ny; ++j) {
    for (Index i = 0; i < g.nx; ++i) {
      const double out_x = f.ux(g.cell((i + 1) % g.nx, j)) - f.ux(g.cell(i, j));
      const double out_y = f.vy(g.cell(i, (j + 1) % g.ny)) - f.vy(g.cell(i, j));
      div(g.cell(i, j)) = (out_x * g.dy() + out_y * g.dx()) / g.area();
    }
  }
  return div;
}

double max_face_speed(const SolenoidalField& f) {
  return std::max(f.ux.cwiseAbs().maxCoeff(), f.vy.cwiseAbs().maxCoeff());
}

std::string to_string(TransportMode m) {
  return m == TransportMode::periodic_full ? "periodic_full" : "interior_domain";
}

RestrictedOperator build_transport_operator(const SolenoidalField& field, TransportMode mode) {
  const Grid& g = field.grid;
  check_grid(g);
  if (field.ux.size() != g.cells() || field.vy.size() != g.cells()) {
    throw SpecError("field arrays do not match the grid");
  }
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(4 * g.cells()));
  const double inv_area = 1.0 / g.area();
  auto face = [&](Index a, Index b, double flux) {
    if (flux == 0.0) return;
    trip.emplace_back(a, b, 0.5 * flux * inv_area);
    trip.emplace_back(b, a, -0.5 * flux * inv_area);
  };
  for (Index j = 0; j < g.ny; ++j) {
    for (Index i = 0; i < g.nx; ++i) {
      const Index b = g.cell(i, j);
      face(g.cell((i + g.nx - 1) % g.nx, j), b, field.ux(b) * g.dy());
      face(g.cell(i, (j + g.ny - 1) % g.ny), b, field.vy(b) * g.dx());
    }
  }
  SparseMatrix m(g.cells(), g.cells());
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();

  Space space(Vector::Constant(g.cells(), g.area()),
              "cells " + std::to_string(g.nx) + "x" + std::to_string(g.ny));
  SubspaceBasis dom = SubspaceBasis::whole(space);
  if (mode == TransportMode::interior_domain) {
    std::vector<Index> idx;
    for (Index j = 0; j < g.ny; ++j) {
      for (Index i = 0; i < g.nx; ++i) {
        const Index d = std::min({i, g.nx - 1 - i, j, g.ny - 1 - j});
        if (d >= 2) idx.push_back(g.cell(i, j));
      }
    }
    dom = SubspaceBasis::coordinates(space, idx);
  }
  return RestrictedOperator(space, LinearMap(std::move(m)), std::move(dom),
                            "transport " + to_string(mode) + " (" + field.provenance + ")");
}

Vector sample_cells(const Grid& grid, const std::function<double(double, double)>& f) {
  Vector out(grid.cells());
  for (Index j = 0; j < grid.ny; ++j) {
    for (Index i = 0; i < grid.nx; ++i) {
      out(grid.cell(i, j)) = f((static_cast<double>(i) + 0.5) * grid.dx(),
                               (static_cast<double>(j) + 0.5) * grid.dy());
    }
  }
  return out;
}

std::vector<Vector> interior_bumps(const RestrictedOperator& op, const Grid& grid,
                                   const std::vector<std::pair<double, double>>& centres,
                                   double radius) {
  const SubspaceBasis ob = orthonormalize(op.domain);
  std::vector<char> allowed(static_cast<size_t>(grid.cells()), 0);
  if (ob.is_coordinate()) {
    for (Index i : ob.indices()) allowed[static_cast<size_t>(i)] = 1;
  } else {
    std::fill(allowed.begin(), allowed.end(), 1);
  }
  auto bump = [](double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    return q * q;
  };
  std::vector<Vector> out;
  for (const auto& [cx, cy] : centres) {
    Vector v = sample_cells(grid, [&](double x, double y) {
      return bump((x - cx) / radius) * bump((y - cy) / radius);
    });
    for (Index k = 0; k < v.size(); ++k) {
      if (!allowed[static_cast<size_t>(k)]) v(k) = 0.0;
    }
    const double nv = norm(op.space, v);
    if (nv > 0.0) out.push_back(v / nv);
  }
  return out;
}

GsReport transport_gs_residual(const Sampler& candidate, const Vector& u0,
                               const RestrictedOperator& op, const Grid& grid,
                               const std::vector<TemporalProfile>& profiles, double T,
                               Index n_t, double tol) {
  const double lx = grid.lx, ly = grid.ly;
  std::vector<std::pair<double, double>> centres{
      {0.3 * lx, 0.3 * ly}, {0.7 * lx, 0.3 * ly}, {0.3 * lx, 0.7 * ly}, {0.7 * lx, 0.7 * ly}};
  auto bumps = interior_bumps(op, grid, centres, 0.15 * std::min(lx, ly));
  const TestFunctionFamily fam = make_family(op, std::move(bumps), profiles, T, n_t);
  return gs_residual(candidate, u0, op, fam, tol);
}

SolenoidalField rotation_field(Index n) {
  Grid g{n, n, 1.0, 1.0};
  const double r_max = 0.5;
  Vector psi(n * n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) * g.dx() - 0.5;
      const double y = static_cast<double>(j) * g.dy() - 0.5;
      psi(j * n + i) = -0.5 * std::min(x * x + y * y, r_max * r_max);
    }
  }
  SolenoidalField f = field_from_stream(g, psi);
  f.provenance = "solid rotation";
  return f;
}

double rotation_blob(double x, double y) {
  const double sigma = 0.15;
  const double dx = x - 0.65, dy = y - 0.5;
  return std::exp(-(dx * dx + dy * dy) / (sigma * sigma));
}

RotationResult rotation_benchmark(Index n, double dt, bool zero_field) {
  const double period = 2.0 * std::acos(-1.0);
  SolenoidalField f = rotation_field(n);
  if (zero_field) {
    f.ux.setZero();
    f.vy.setZero();
  }
  const RestrictedOperator op = build_transport_operator(f, TransportMode::periodic_full);
  const Generator gen = negated(op, "rotation");
  const Vector u0 = sample_cells(f.grid, rotation_blob);
  RotationResult res;
  res.n = n;
  res.dt = dt;
  res.steps = static_cast<Index>(std::llround(period / dt));
  const Trajectory tr = evolve_cayley(gen, u0, dt, res.steps, std::max<Index>(res.steps, 1));
  const Vector& uT = tr.states.back();
  const double n0 = norm(op.space, u0);
  res.final_error = norm(op.space, uT - u0) / n0;
  res.energy_drift = std::abs(norm(op.space, uT) - n0) / n0;
  for (size_t k = 1; k < tr.step_norms.size(); ++k) {
    res.max_step_drift = std::max(res.max_step_drift,
                                  std::abs(tr.step_norms[k] - tr.step_norms[k - 1]) / n0);
  }
  const Vector& w = op.space.weights();
  res.mass_drift = std::abs(w.dot(uT) - w.dot(u0)) / w.dot(u0.cwiseAbs());
  res.solver_tol = tr.meta.solver_tol;
  return res;
}

namespace {

std::vector<double> read_csv_numbers(const std::string& path, Index& rows, Index& cols) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path);
  std::vector<double> out;
  std::string line;
  rows = 0;
  cols = -1;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    Index c = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        out.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw SpecError(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
      ++c;
    }
    if (cols >= 0 && c != cols) {
      throw SpecError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(cols) + " columns, got " + std::to_string(c));
    }
    cols = c;
    ++rows;
  }
  if (rows == 0) throw SpecError(path + ": empty");
  return out;
}

}  // namespace

Vector read_stream_csv(const std::string& path, Index& rows, Index& cols) {
  std::vector<double> v = read_csv_numbers(path, rows, cols);
  return Eigen::Map<Vector>(v.data(), static_cast<Index>(v.size()));
}

SolenoidalField load_field_file(const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.extension() == ".csv") {
    Index rows = 0, cols = 0;
    std::vector<double> v = read_csv_numbers(path, rows, cols);
    // Without a header the box is the unit square and the samples are taken as
    // periodic (rows = ny, cols = nx).
    Grid g{cols, rows, 1.0, 1.0};
    return field_from_stream(g, Eigen::Map<Vector>(v.data(), static_cast<Index>(v.size())));
  }
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open " + path);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(path + ": " + e.what());
  }
  Grid g;
  try {
    g.nx = h.at("nx").get<Index>();
    g.ny = h.at("ny").get<Index>();
    g.lx = h.value("lx", 1.0);
    g.ly = h.value("ly", 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(path + ": field header: " + e.what());
  }
  std::vector<double> psi;
  if (h.contains("psi")) {
    psi = h["psi"].get<std::vector<double>>();
  } else {
    const std::string fmt = h.value("format", "csv");
    const fs::path data = p.parent_path() / h.at("data").get<std::string>();
    if (fmt == "csv") {
      Index rows = 0, cols = 0;
      psi = read_csv_numbers(data.string(), rows, cols);
    } else if (fmt == "f64le") {
      std::ifstream bin(data, std::ios::binary);
      if (!bin) throw SpecError("cannot open " + data.string());
      std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bin)), {});
      if (bytes.size() % 8 != 0) throw SpecError(data.string() + ": size not a multiple of 8");
      psi.resize(bytes.size() / 8);
      for (size_t k = 0; k < psi.size(); ++k) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[8 * k + static_cast<size_t>(b)];
        psi[k] = std::bit_cast<double>(bits);
      }
    } else {
      throw SpecError(path + ": unknown format '" + fmt + "' (csv or f64le)");
    }
  }
  return field_from_stream(g, Eigen::Map<Vector>(psi.data(), static_cast<Index>(psi.size())));
}

void write_field_file(const std::string& header_path, const Grid& grid, const Vector& psi,
                      const std::string& format) {
  namespace fs = std::filesystem;
  const fs::path hp(header_path);
  const std::string stem = hp.stem().string();
  nlohmann::json h{{"nx", grid.nx}, {"ny", grid.ny}, {"lx", grid.lx}, {"ly", grid.ly},
                   {"format", format}};
  const Index cols = psi.size() == grid.cells() ? grid.nx : grid.nx + 1;
  if (format == "csv") {
    const std::string name = stem + "_psi.csv";
    std::ofstream out(hp.parent_path() / name);
    out.precision(17);
    for (Index k = 0; k < psi.size(); ++k) {
      out << psi(k) << ((k + 1) % cols == 0 ? "\n" : ",");
    }
    h["data"] = name;
  } else if (format == "f64le") {
    const std::string name = stem + "_psi.f64";
    std::ofstream out(hp.parent_path() / name, std::ios::binary);
    for (Index k = 0; k < psi.size(); ++k) {
      std::uint64_t bits = std::bit_cast<std::uint64_t>(psi(k));
      for (int b = 0; b < 8; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
    h["data"] = name;
  } else {
    throw SpecError("unknown field format '" + format + "'");
  }
  std::ofstream(header_path) << h.dump(2) << "\n";
}

}  // namespace skewflow
