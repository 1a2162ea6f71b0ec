#include <iostream>

#include "CLI11.hpp"
#include "skewflow/cli.hpp"

int main(int argc, char** argv) {
  skewflow::RunConfig cfg;
  CLI::App app{"skewflow: numerical workbench for skew-symmetric operators"};
  app.add_option("command", cfg.command,
                 "analyze | extend | evolve | verify | witness | multiplicity | transport-run | oracle-check")
      ->required();
  app.add_option("--input,-i", cfg.input, "operator spec (JSON)")->required();
  app.add_option("--out,-o", cfg.output_dir, "output directory");
  app.add_option("--rank-tol", cfg.rank_tol);
  app.add_option("--skew-tol", cfg.skew_tol);
  app.add_option("--gs-tol", cfg.gs_tol);
  app.add_option("--solver-tol", cfg.solver_tol);
  app.add_option("--dt", cfg.dt);
  app.add_option("--horizon", cfg.horizon);
  app.add_option("--method", cfg.method, "cayley | exact");
  app.add_option("--stride", cfg.stride, "keep every k-th state");
  app.add_option("--seed", cfg.seed);
  double theta = 0.0;
  auto* th = app.add_option("--theta", theta, "extension parameter in [-1, 1]");
  app.add_option("--t0", cfg.t0, "splice time for witness");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (th->count() > 0) cfg.theta = theta;
  return skewflow::run(cfg, std::cerr);
}
