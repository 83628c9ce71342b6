#include "minimax/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "minimax/errors.hpp"

namespace minimax {

namespace fs = std::filesystem;

namespace {

// Runs fn(i) for i in [0, n) on a small worker pool; rethrows the first failure.
template <typename Fn>
void parallel_for(long n, unsigned threads, Fn fn) {
  if (n <= 0) return;
  unsigned t = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  t = static_cast<unsigned>(std::min<long>(t, n));
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
        return;
      }
    }
  };
  if (t == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < t; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

MethodParams resolve_params(const ExperimentConfig& config, double L) {
  MethodParams p = config.params;
  if (!config.eta_set) p.eta = 0.5 / L;
  if (!config.s_set) p.s = 0.5 * p.eta;
  return p;
}

Vec center_or_origin(const ExperimentConfig& config, const MinimaxProblem& problem) {
  if (!config.z0) return Vec::Zero(problem.dim());
  if (config.z0->size() != problem.dim()) {
    throw ValidationError("--z0 has length " + std::to_string(config.z0->size()) + ", expected " +
                          std::to_string(problem.dim()));
  }
  return *config.z0;
}

// z0 itself if stationary, the Newton limit from z0 if searching, else an error.
Vec stationary_point(const ExperimentConfig& config, const MinimaxProblem& problem) {
  const Vec z0 = center_or_origin(config, problem);
  const double fnorm = saddle_gradient(problem, z0).norm();
  if (fnorm <= config.tol_stationary) return z0;
  if (!config.search) {
    throw PreconditionError("point is not stationary (|F| = " + std::to_string(fnorm) +
                            "); pass --search to run Newton from it");
  }
  return find_stationary(problem, z0);
}

std::string prepare_out_dir(const ExperimentConfig& config) {
  fs::create_directories(config.out_dir);
  return config.out_dir;
}

json params_json(const MethodParams& p) {
  return {{"method", to_string(p.method)}, {"eta", p.eta}, {"s", p.s}, {"tau", p.tau}, {"dt", p.dt}};
}

std::string member_file(const std::string& dir, long i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "traj_%05ld.csv", i);
  return (fs::path(dir) / buf).string();
}

}  // namespace

MinimaxProblem load_problem(const ProblemSource& source) {
  if (source.path && source.builtin) {
    throw ValidationError("give either --problem or --builtin, not both");
  }
  if (source.path) return load_problem_file(*source.path);
  if (source.builtin) return builtin_problem(*source.builtin, source.params);
  throw ValidationError("no problem given (use --problem <file> or --builtin <name>)");
}

std::vector<double> parse_grid(const std::string& spec) {
  std::stringstream ss(spec);
  std::string lo, hi, n;
  if (!std::getline(ss, lo, ':') || !std::getline(ss, hi, ':') || !std::getline(ss, n)) {
    throw ValidationError("grid must look like lo:hi:n, got '" + spec + "'");
  }
  try {
    const double a = std::stod(lo), b = std::stod(hi);
    const int count = std::stoi(n);
    if (count < 0 || !(a > 0.0) || !(b > 0.0)) throw ValidationError("");
    return geometric_grid(a, b, count);
  } catch (const std::exception&) {
    throw ValidationError("grid must look like lo:hi:n with positive lo, hi and n >= 0, got '" +
                          spec + "'");
  }
}

Vec parse_vector(const std::string& spec) {
  std::vector<double> vals;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      vals.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("cannot parse '" + item + "' as a number");
    }
  }
  return Eigen::Map<Vec>(vals.data(), static_cast<Index>(vals.size()));
}

Vec ensemble_init(std::uint64_t seed, long index, const Vec& center, double radius) {
  const auto idx = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vec z = center;
  for (Index i = 0; i < z.size(); ++i) z(i) += radius * unit(rng);
  return z;
}

CommandResult cmd_classify(const ExperimentConfig& config) {
  const MinimaxProblem problem = load_problem(config.problem);
  const Vec z = stationary_point(config, problem);
  CharacterizeConfig cc;
  cc.stationary_tol = config.tol_stationary;
  if (config.tau_grid) cc.tau_grid = *config.tau_grid;
  const EquilibriumReport rep = characterize_equilibrium(problem, z, cc);

  CommandResult res;
  res.summary = report_json(rep);
  res.summary["problem"] = problem.name();
  const std::string path = (fs::path(prepare_out_dir(config)) / "classify.json").string();
  write_json_file(res.summary, path);
  res.files.push_back(path);
  res.exit_code = rep.mismatches.empty() ? kExitOk : kExitMismatch;
  return res;
}

CommandResult cmd_simulate(const ExperimentConfig& config) {
  const MinimaxProblem problem = load_problem(config.problem);
  const MethodParams params = resolve_params(config, problem.lipschitz_bound());
  validate_params(params, problem.lipschitz_bound());
  if (config.n < 0) throw ValidationError("--n must be non-negative");
  const Vec center = center_or_origin(config, problem);
  const std::string dir = prepare_out_dir(config);

  std::vector<Termination> ends(static_cast<size_t>(config.n));
  parallel_for(config.n, config.threads, [&](long i) {
    const Vec z0 = ensemble_init(config.seed, i, center, config.radius);
    const Trajectory traj = run_method(problem, z0, params, config.run);
    if (config.write_trajectories) {
      std::ofstream out(member_file(dir, i));
      write_trajectory_csv(out, traj);
    }
    ends[static_cast<size_t>(i)] = traj.termination;
  });

  CommandResult res;
  json summary = {{"problem", problem.name()}, {"params", params_json(params)}, {"n", config.n},
                  {"seed", config.seed}, {"radius", config.radius}, {"center", vector_json(center)}};
  if (config.n == 0) {
    summary["equilibria"] = json::array();
    res.summary = summary;
    const std::string path = (fs::path(dir) / "summary.json").string();
    write_json_file(summary, path);
    res.files.push_back(path);
    return res;
  }

  struct Cluster {
    Vec point;
    long count = 0;
  };
  std::vector<Cluster> clusters;
  long diverged = 0, max_iters = 0, converged = 0;
  for (const Termination& t : ends) {
    if (t.kind == Termination::Kind::Diverged) {
      ++diverged;
      continue;
    }
    if (t.kind == Termination::Kind::MaxIters) {
      ++max_iters;
      continue;
    }
    ++converged;
    auto it = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& c) {
      return (c.point - t.z).norm() <= config.tol_cluster;
    });
    if (it == clusters.end()) {
      clusters.push_back({t.z, 1});
    } else {
      ++it->count;
    }
  }
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    return std::lexicographical_compare(a.point.data(), a.point.data() + a.point.size(),
                                        b.point.data(), b.point.data() + b.point.size());
  });
  const double n = static_cast<double>(config.n);
  json eq = json::array();
  for (const Cluster& c : clusters) {
    eq.push_back({{"point", vector_json(c.point)}, {"count", c.count}, {"fraction", c.count / n}});
  }
  summary["equilibria"] = eq;
  summary["converged_fraction"] = converged / n;
  summary["diverged_fraction"] = diverged / n;
  summary["max_iters_fraction"] = max_iters / n;
  summary["tol_conv"] = config.run.tol_conv;
  summary["max_iters"] = config.run.max_iters;
  summary["diverge_norm"] = config.run.diverge_norm;
  res.summary = summary;
  const std::string path = (fs::path(dir) / "summary.json").string();
  write_json_file(summary, path);
  res.files.push_back(path);
  return res;
}

CommandResult cmd_avoidance(const ExperimentConfig& config) {
  const MinimaxProblem problem = load_problem(config.problem);
  const double L = problem.lipschitz_bound();
  MethodParams params = resolve_params(config, L);
  if (!is_discrete(params.method)) {
    throw ValidationError("avoidance runs gda_tt or eg_tt, not " + to_string(params.method));
  }
  const Vec target = stationary_point(config, problem);
  const HessianBlocks hb = hessian_blocks(problem, target);
  const Mat H = hb.jacobian();
  const CanonicalBlocks cb = canonicalize(hb);
  if (config.n < 0) throw ValidationError("--n must be non-negative");

  json summary = {{"problem", problem.name()}, {"target", vector_json(target)}};
  std::string tau_source = "given";
  if (params.method == Method::EgTT) {
    if (!is_strict_non_minimax(cb)) {
      throw PreconditionError("target is not a strict non-minimax point; eg_tt avoidance does not apply");
    }
    if (!config.tau_set) {
      const InfinityVerdict iv = infinity_eg_verdict(H, problem.d1(), params.eta, StabilityMethod::EgTTDiscrete,
                                                     config.tau_grid.value_or(default_tau_grid()));
      if (iv.outcome == Outcome::Unstable) {
        params.tau = iv.tau_star;
        tau_source = "infinity_eg_verdict";
      } else {
        tau_source = "default (verdict " + to_string(iv.outcome) + ")";
      }
    }
    validate_params(params, L, true);
  } else {
    validate_params(params, L, true);
    const EigenCurves curves = eigencurves(H, problem.d1(), default_eps_grid());
    json witness = json::array();
    for (Index j = 0; j < curves.size(); ++j) {
      const double iota = curves.hemicurvature[j];
      if (curves.type[j] == CurveType::SqrtEpsPair && iota < 0.5 * params.eta) {
        witness.push_back({{"curve", j}, {"iota", number_json(iota)}});
      }
    }
    if (witness.empty()) {
      throw PreconditionError("target has no hemicurvature below eta/2; gda_tt avoidance does not apply");
    }
    summary["witness"] = witness;
  }

  std::vector<double> dist(static_cast<size_t>(config.n));
  parallel_for(config.n, config.threads, [&](long i) {
    const Vec z0 = ensemble_init(config.seed, i, target, config.radius);
    RunOptions opts = config.run;
    opts.record_every = std::max(opts.record_every, opts.max_iters + 1);
    const Trajectory traj = run_discrete(problem, z0, params, opts);
    dist[static_cast<size_t>(i)] = (traj.termination.z - target).norm();
  });

  long hits = 0;
  for (double d : dist) {
    if (d <= config.tol_target) ++hits;
  }
  const double n = static_cast<double>(config.n);
  const double fraction = config.n > 0 ? hits / n : 0.0;
  const double threshold = config.n > 0 ? 1.0 / n : 0.0;
  summary["params"] = params_json(params);
  summary["tau_source"] = tau_source;
  summary["n"] = config.n;
  summary["seed"] = config.seed;
  summary["radius"] = config.radius;
  summary["tol_target"] = config.tol_target;
  summary["max_iters"] = config.run.max_iters;
  summary["converged_to_target"] = hits;
  summary["fraction"] = fraction;
  summary["threshold"] = threshold;
  summary["passed"] = fraction <= threshold;

  CommandResult res;
  res.summary = summary;
  const std::string path = (fs::path(prepare_out_dir(config)) / "avoidance.json").string();
  write_json_file(summary, path);
  res.files.push_back(path);
  res.exit_code = fraction <= threshold ? kExitOk : kExitMismatch;
  return res;
}

CommandResult cmd_sweep(const ExperimentConfig& config) {
  const MinimaxProblem problem = load_problem(config.problem);
  const MethodParams params = resolve_params(config, problem.lipschitz_bound());
  Vec z = center_or_origin(config, problem);
  if (config.search) z = find_stationary(problem, z);
  const Mat H = jacobian_F(problem, z);
  const Index d1 = problem.d1();

  std::vector<double> taus;
  if (config.tau_grid) {
    taus = *config.tau_grid;
  } else {
    for (double e : default_eps_grid()) taus.push_back(1.0 / e);
  }
  std::vector<double> eps;
  for (double t : taus) eps.push_back(1.0 / t);

  EigenCurveOptions opts;
  opts.require_labels = false;
  const EigenCurves curves = eigencurves(H, d1, eps, opts);

  const std::string dir = prepare_out_dir(config);
  CommandResult res;
  const std::string curve_path = (fs::path(dir) / "eigencurves.csv").string();
  {
    std::ofstream out(curve_path);
    write_eigencurves_csv(out, curves);
  }
  const std::string verdict_path = (fs::path(dir) / "verdicts.csv").string();
  {
    std::ofstream out(verdict_path);
    out << "tau,method,param,stable,region_side,jacobian_side\n";
    out.precision(17);
    for (double tau : taus) {
      const std::pair<StabilityMethod, double> rows[] = {{StabilityMethod::EgTTContinuous, params.s},
                                                         {StabilityMethod::EgTTDiscrete, params.eta},
                                                         {StabilityMethod::GdaTT, params.eta}};
      for (const auto& [method, param] : rows) {
        const StabilityVerdict v = stability(method, H, d1, param, tau);
        out << tau << ',' << to_string(method) << ',' << param << ',' << to_string(v.stable) << ','
            << to_string(v.region_side) << ',' << to_string(v.jacobian_side) << '\n';
      }
    }
  }
  res.files = {curve_path, verdict_path};
  res.summary = {{"problem", problem.name()},
                 {"point", vector_json(z)},
                 {"n_grid", taus.size()},
                 {"labeled", curves.labeled},
                 {"params", params_json(params)},
                 {"files", res.files}};
  if (curves.labeled && eps.size() >= 3) res.summary["s0"] = number_json(s_zero(curves));
  return res;
}

}  // namespace minimax
