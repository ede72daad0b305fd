// Batch driver: pbcmps --mode optimize|scan|observables|oracle|report ...
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pbcmps/cli.hpp"
#include "pbcmps/errors.hpp"
#include "pbcmps/io.hpp"

int main(int argc, char** argv) {
  using namespace pbcmps;
  CLI::App app{"Variational TI-MPS ground states on periodic rings"};
  app.set_version_flag("--version", std::string(kVersion));

  std::string config;
  std::string model, mode, init, tensor, out, results;
  long long N = 0;
  int D = 0, m = 0, n = 0, fixed_m = 0, max_iter = 0, checkpoint = 0;
  double k = 0, tol_grad = 0, tol_energy = 0, plateau_tol = 0;
  std::uint64_t seed = 0;

  app.add_option("--config", config, "key=value run file; flags given on the command line override it");
  auto* o_model = app.add_option("--model", model, "ising:B=<field>, heisenberg-half or heisenberg-one");
  auto* o_N = app.add_option("--N", N, "ring length");
  auto* o_D = app.add_option("--D", D, "bond dimension");
  auto* o_mode = app.add_option("--mode", mode, "optimize, scan, observables, oracle or report");
  auto* o_m = app.add_option("--m", m, "exact short-arc length (default (N-2)/2)");
  auto* o_n = app.add_option("--n", n, "number of dominant eigenpairs (default D^2)");
  auto* o_k = app.add_option("--k", k, "scan slope n = k m");
  auto* o_fixed_m = app.add_option("--fixed-m", fixed_m, "scan over n at this m");
  auto* o_init = app.add_option("--init", init, "perturbed-product, random, file or continuation");
  auto* o_tensor = app.add_option("--tensor", tensor, "tensor file for --init file|continuation and --mode observables");
  auto* o_seed = app.add_option("--seed", seed, "random seed");
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_results = app.add_option("--results", results, "directory scanned by --mode report");
  auto* o_tol_grad = app.add_option("--tol-grad", tol_grad, "gradient infinity-norm tolerance");
  auto* o_tol_energy = app.add_option("--tol-energy", tol_energy, "relative energy stall tolerance");
  auto* o_plateau = app.add_option("--plateau-tol", plateau_tol, "relative plateau tolerance");
  auto* o_max_iter = app.add_option("--max-iter", max_iter, "iteration cap per optimization");
  auto* o_checkpoint = app.add_option("--checkpoint-every", checkpoint, "checkpoint period in iterations");
  auto* o_plain = app.add_flag("--no-precondition", "plain conjugate gradient without the metric preconditioner");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_code::ok : exit_code::validation;
  }

  try {
    RunSpec spec = config.empty() ? RunSpec{} : load_spec(config);
    auto set = [&](CLI::Option* opt, const char* key, const std::string& value) {
      if (opt->count() > 0) set_field(spec, key, value);
    };
    set(o_model, "model", model);
    set(o_N, "N", std::to_string(N));
    set(o_D, "D", std::to_string(D));
    set(o_mode, "mode", mode);
    set(o_m, "m", std::to_string(m));
    set(o_n, "n", std::to_string(n));
    set(o_k, "k", o_k->as<std::string>());
    set(o_fixed_m, "fixed_m", std::to_string(fixed_m));
    set(o_init, "init", init);
    set(o_tensor, "tensor_file", tensor);
    set(o_seed, "seed", std::to_string(seed));
    set(o_out, "out", out);
    set(o_results, "results", results);
    set(o_tol_grad, "tol_grad", o_tol_grad->as<std::string>());
    set(o_tol_energy, "tol_energy", o_tol_energy->as<std::string>());
    set(o_plateau, "plateau_tol", o_plateau->as<std::string>());
    set(o_max_iter, "max_iterations", std::to_string(max_iter));
    set(o_checkpoint, "checkpoint_every", std::to_string(checkpoint));
    set(o_plain, "precondition", "0");
    return run(spec, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::failure;
  }
}
