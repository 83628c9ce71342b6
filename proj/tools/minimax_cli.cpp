// Command-line front end: classify | simulate | avoidance | sweep.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "minimax/commands.hpp"
#include "minimax/errors.hpp"

namespace {

struct Flags {
  std::string problem_path;
  std::string builtin;
  double a = 0.0, b = 0.0, c = 0.0;
  std::string method = "eg_tt";
  std::string tau_grid;
  std::string z0;
  std::string export_problem;
  bool no_trajectories = false;
};

void add_common(CLI::App* sub, Flags& f, minimax::ExperimentConfig& cfg) {
  sub->add_option("--problem", f.problem_path, "JSON problem file");
  sub->add_option("--builtin", f.builtin,
                  "builtin problem: bilinear, scalar_degenerate, nondegenerate_quadratic, "
                  "strict_nonminimax_demo");
  sub->add_option("--a", f.a, "builtin parameter a");
  sub->add_option("--b", f.b, "builtin parameter b");
  sub->add_option("--c", f.c, "builtin parameter c");
  sub->add_option("--method", f.method, "gda_tt | eg_tt | ode_plain | ode_eg | ode_eg_tt");
  sub->add_option("--eta", cfg.params.eta, "discrete step size (default 0.5/L)");
  sub->add_option("--s", cfg.params.s, "continuous step size (default eta/2)");
  sub->add_option("--tau", cfg.params.tau, "timescale tau >= 1");
  sub->add_option("--dt", cfg.params.dt, "RK4 step for the ODE methods");
  sub->add_option("--tau-grid", f.tau_grid, "geometric tau grid lo:hi:n");
  sub->add_option("--n", cfg.n, "ensemble size");
  sub->add_option("--seed", cfg.seed, "ensemble seed");
  sub->add_option("--radius", cfg.radius, "half-width of the init box");
  sub->add_option("--z0", f.z0, "comma-separated point (target, box center or start)");
  sub->add_flag("--search", cfg.search, "Newton search for a stationary point from --z0");
  sub->add_option("--out", cfg.out_dir, "output directory");
  sub->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  sub->add_option("--max-iters", cfg.run.max_iters, "iteration cap (ODE: t_end = dt * max-iters)");
  sub->add_option("--record-every", cfg.run.record_every, "record every k-th iterate");
  sub->add_option("--tol-conv", cfg.run.tol_conv, "convergence tolerance on |F|");
  sub->add_option("--tol-diverge", cfg.run.diverge_norm, "divergence threshold on |z|");
  sub->add_option("--tol-stationary", cfg.tol_stationary, "stationarity tolerance on |F|");
  sub->add_option("--tol-cluster", cfg.tol_cluster, "distance for merging endpoints");
  sub->add_option("--tol-target", cfg.tol_target, "distance counted as converging to the target");
  sub->add_flag("--no-trajectories", f.no_trajectories, "skip per-member trajectory CSVs");
  sub->add_option("--export-problem", f.export_problem, "also write the loaded problem as JSON");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-timescale GDA/EG dynamics and equilibrium classification"};
  app.require_subcommand(1);

  Flags f;
  minimax::ExperimentConfig cfg;
  CLI::App* classify = app.add_subcommand("classify", "classify a stationary point");
  CLI::App* simulate = app.add_subcommand("simulate", "run a trajectory ensemble");
  CLI::App* avoidance = app.add_subcommand("avoidance", "measure convergence to an unstable target");
  CLI::App* sweep = app.add_subcommand("sweep", "eigencurves and verdicts over a tau grid");
  for (CLI::App* sub : {classify, simulate, avoidance, sweep}) add_common(sub, f, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : minimax::kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  auto given = [&](const char* name) { return sub->count(name) > 0; };
  try {
    if (!f.problem_path.empty()) cfg.problem.path = f.problem_path;
    if (!f.builtin.empty()) cfg.problem.builtin = f.builtin;
    if (given("--a")) cfg.problem.params["a"] = f.a;
    if (given("--b")) cfg.problem.params["b"] = f.b;
    if (given("--c")) cfg.problem.params["c"] = f.c;
    cfg.params.method = minimax::method_from_string(f.method);
    cfg.eta_set = given("--eta");
    cfg.s_set = given("--s");
    cfg.tau_set = given("--tau");
    if (!f.tau_grid.empty()) cfg.tau_grid = minimax::parse_grid(f.tau_grid);
    if (!f.z0.empty()) cfg.z0 = minimax::parse_vector(f.z0);
    cfg.write_trajectories = !f.no_trajectories;

    if (!f.export_problem.empty()) {
      minimax::save_problem_file(minimax::load_problem(cfg.problem), f.export_problem);
    }

    minimax::CommandResult res;
    if (sub == classify) res = minimax::cmd_classify(cfg);
    else if (sub == simulate) res = minimax::cmd_simulate(cfg);
    else if (sub == avoidance) res = minimax::cmd_avoidance(cfg);
    else res = minimax::cmd_sweep(cfg);
    std::cout << res.summary.dump(2) << '\n';
    return res.exit_code;
  } catch (const minimax::InconsistencyError& e) {
    std::cerr << "consistency check failed: " << e.what() << '\n';
    return minimax::kExitMismatch;
  } catch (const minimax::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return minimax::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return minimax::kExitUsage;
  }
}
