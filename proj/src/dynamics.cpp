#include "minimax/dynamics.hpp"

#include <cmath>

#include "minimax/errors.hpp"

namespace minimax {

namespace {

constexpr double kMinRcond = 1e-12;

Vec solve_checked(const Mat& M, const Vec& rhs, const char* what) {
  Eigen::PartialPivLU<Mat> lu(M);
  const double rc = lu.rcond();
  if (!(rc > kMinRcond)) {
    throw SingularSolveError(std::string(what) + ": matrix is numerically singular (rcond " +
                             std::to_string(rc) + ")");
  }
  return lu.solve(rhs);
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::GdaTT: return "gda_tt";
    case Method::EgTT: return "eg_tt";
    case Method::OdePlain: return "ode_plain";
    case Method::OdeEg: return "ode_eg";
    case Method::OdeEgTT: return "ode_eg_tt";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "gda_tt") return Method::GdaTT;
  if (name == "eg_tt") return Method::EgTT;
  if (name == "ode_plain") return Method::OdePlain;
  if (name == "ode_eg") return Method::OdeEg;
  if (name == "ode_eg_tt") return Method::OdeEgTT;
  throw ValidationError("unknown method '" + name + "'");
}

bool is_discrete(Method m) { return m == Method::GdaTT || m == Method::EgTT; }

std::string to_string(Termination::Kind k) {
  switch (k) {
    case Termination::Kind::Converged: return "converged";
    case Termination::Kind::MaxIters: return "max_iters";
    case Termination::Kind::Diverged: return "diverged";
  }
  return "unknown";
}

double eg_diffeomorphism_bound(double L) { return (std::sqrt(5.0) - 1.0) / (2.0 * L); }

void validate_params(const MethodParams& p, double L, bool for_avoidance) {
  if (!(p.tau >= 1.0) || !std::isfinite(p.tau)) {
    throw ValidationError("tau must be a finite real >= 1");
  }
  switch (p.method) {
    case Method::GdaTT:
    case Method::EgTT:
      if (!(p.eta > 0.0 && p.eta < 1.0 / L)) {
        throw ValidationError("eta must satisfy 0 < eta < 1/L = " + std::to_string(1.0 / L));
      }
      if (for_avoidance && p.method == Method::EgTT && !(p.eta < eg_diffeomorphism_bound(L))) {
        throw ValidationError("avoidance with eg_tt requires eta < (sqrt(5)-1)/(2L) = " +
                              std::to_string(eg_diffeomorphism_bound(L)));
      }
      break;
    case Method::OdeEg:
    case Method::OdeEgTT:
      if (!(p.s > 0.0 && p.s < 1.0 / L)) {
        throw ValidationError("s must satisfy 0 < s < 1/L = " + std::to_string(1.0 / L));
      }
      [[fallthrough]];
    case Method::OdePlain:
      if (!(p.dt > 0.0)) throw ValidationError("dt must be positive");
      break;
  }
}

Vec apply_timescale(const Vec& v, Index d1, double tau) {
  Vec out = v;
  out.head(d1) /= tau;
  return out;
}

Vec step_gda_tt(const MinimaxProblem& problem, const Vec& z, double eta, double tau) {
  return z - eta * apply_timescale(saddle_gradient(problem, z), problem.d1(), tau);
}

Vec step_eg_tt(const MinimaxProblem& problem, const Vec& z, double eta, double tau) {
  const Index d1 = problem.d1();
  const Vec mid = z - eta * apply_timescale(saddle_gradient(problem, z), d1, tau);
  return z - eta * apply_timescale(saddle_gradient(problem, mid), d1, tau);
}

Vec ode_field(const MinimaxProblem& problem, FieldKind kind, const Vec& z, double s, double tau) {
  const Vec F = saddle_gradient(problem, z);
  if (kind == FieldKind::Plain) {
    return -F;
  }
  const Index n = problem.dim();
  const double t = (kind == FieldKind::EgTT) ? tau : 1.0;
  Mat M = jacobian_F(problem, z);
  M.topRows(problem.d1()) /= t;  // Λ_τ DF
  M = Mat::Identity(n, n) + s * M;
  return -solve_checked(M, apply_timescale(F, problem.d1(), t), "ode_field");
}

namespace {

Termination finish(Termination::Kind kind, const Vec& z, double residual) {
  return Termination{kind, z, residual, z.norm()};
}

}  // namespace

Trajectory run_discrete(const MinimaxProblem& problem, const Vec& z0, const MethodParams& params,
                        const RunOptions& options) {
  if (!is_discrete(params.method)) {
    throw ValidationError("run_discrete requires gda_tt or eg_tt");
  }
  validate_params(params, problem.lipschitz_bound());
  Trajectory traj;
  traj.params = params;

  Vec z = z0;
  double fnorm = saddle_gradient(problem, z).norm();
  traj.points.push_back({0, 0.0, z, fnorm});
  const long every = std::max(1L, options.record_every);

  long k = 0;
  for (;; ++k) {
    if (fnorm <= options.tol_conv) {
      traj.termination = finish(Termination::Kind::Converged, z, fnorm);
      break;
    }
    if (!(z.norm() < options.diverge_norm) || !std::isfinite(fnorm)) {
      traj.termination = finish(Termination::Kind::Diverged, z, fnorm);
      break;
    }
    if (k >= options.max_iters) {
      traj.termination = finish(Termination::Kind::MaxIters, z, fnorm);
      break;
    }
    z = params.method == Method::GdaTT ? step_gda_tt(problem, z, params.eta, params.tau)
                                       : step_eg_tt(problem, z, params.eta, params.tau);
    fnorm = saddle_gradient(problem, z).norm();
    if ((k + 1) % every == 0) {
      traj.points.push_back({k + 1, static_cast<double>(k + 1), z, fnorm});
    }
  }
  if (traj.points.back().step != k) {
    traj.points.push_back({k, static_cast<double>(k), z, fnorm});
  }
  return traj;
}

Trajectory integrate(const MinimaxProblem& problem, FieldKind kind, const Vec& z0, double s,
                     double tau, double dt, double t_end, const RunOptions& options) {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  Trajectory traj;
  traj.params.method = kind == FieldKind::Plain ? Method::OdePlain
                       : kind == FieldKind::Eg  ? Method::OdeEg
                                                : Method::OdeEgTT;
  traj.params.s = s;
  traj.params.tau = tau;
  traj.params.dt = dt;
  traj.params.eta = 2.0 * s;

  auto field = [&](const Vec& z) { return ode_field(problem, kind, z, s, tau); };

  Vec z = z0;
  double fnorm = saddle_gradient(problem, z).norm();
  traj.points.push_back({0, 0.0, z, fnorm});
  const long every = std::max(1L, options.record_every);
  // Number of whole steps that fit in [0, t_end], robust to rounding of t_end/dt.
  const long n_steps = t_end > 0.0 ? static_cast<long>(std::floor(t_end / dt + 1e-9)) : 0;

  long k = 0;
  for (;; ++k) {
    if (fnorm <= options.tol_conv) {
      traj.termination = finish(Termination::Kind::Converged, z, fnorm);
      break;
    }
    if (!(z.norm() < options.diverge_norm) || !std::isfinite(fnorm)) {
      traj.termination = finish(Termination::Kind::Diverged, z, fnorm);
      break;
    }
    if (k >= n_steps) {
      traj.termination = finish(Termination::Kind::MaxIters, z, fnorm);
      break;
    }
    const Vec k1 = field(z);
    const Vec k2 = field(z + 0.5 * dt * k1);
    const Vec k3 = field(z + 0.5 * dt * k2);
    const Vec k4 = field(z + dt * k3);
    z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    fnorm = saddle_gradient(problem, z).norm();
    if ((k + 1) % every == 0) {
      traj.points.push_back({k + 1, (k + 1) * dt, z, fnorm});
    }
  }
  if (traj.points.back().step != k) {
    traj.points.push_back({k, k * dt, z, fnorm});
  }
  return traj;
}

Trajectory run_method(const MinimaxProblem& problem, const Vec& z0, const MethodParams& params,
                      const RunOptions& options) {
  if (is_discrete(params.method)) {
    return run_discrete(problem, z0, params, options);
  }
  validate_params(params, problem.lipschitz_bound());
  const FieldKind kind = params.method == Method::OdePlain ? FieldKind::Plain
                         : params.method == Method::OdeEg  ? FieldKind::Eg
                                                           : FieldKind::EgTT;
  Trajectory traj = integrate(problem, kind, z0, params.s, params.tau, params.dt,
                              params.dt * static_cast<double>(options.max_iters), options);
  traj.params = params;
  return traj;
}

Vec find_stationary(const MinimaxProblem& problem, const Vec& z0, double newton_tol, int newton_max) {
  Vec z = z0;
  Vec F = saddle_gradient(problem, z);
  for (int it = 0; it < newton_max; ++it) {
    if (F.norm() <= newton_tol) return z;
    const Mat J = jacobian_F(problem, z);
    Vec dz;
    try {
      dz = solve_checked(J, F, "find_stationary");
    } catch (const SingularSolveError&) {
      throw SingularSolveError("find_stationary: singular Jacobian at iterate " + std::to_string(it));
    }
    z -= dz;
    F = saddle_gradient(problem, z);
  }
  if (F.norm() <= newton_tol) return z;
  throw ConvergenceError("find_stationary: no convergence within " + std::to_string(newton_max) +
                         " Newton steps (|F| = " + std::to_string(F.norm()) + ")");
}

}  // namespace minimax
