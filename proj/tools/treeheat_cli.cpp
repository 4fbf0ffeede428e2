#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "treeheat/run_config.hpp"

int main(int argc, char** argv) {
  // keep any threaded BLAS deterministic and single-threaded
  setenv("OPENBLAS_NUM_THREADS", "1", 0);
  setenv("OMP_NUM_THREADS", "1", 0);

  CLI::App app{"heat kernels and eigenvalue bounds on symmetric metric trees"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  double refine = 1.0;
  std::string seed;

  const std::vector<std::string> commands = {"geometry", "heat", "bounds", "schrodinger",
                                             "oracle-compare"};
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--refine", refine, "multiply points_per_unit (refinement studies)");
    sub->add_option("--seed", seed)
        ->check([](const std::string&) -> std::string {
          return "--seed is rejected: this tool has no randomness anywhere";
        });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (const std::string& name : commands)
      if (app.got_subcommand(name))
        return treeheat::run_command(name, config_path, out_dir, refine);
  } catch (const treeheat::config_error& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
