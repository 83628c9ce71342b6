#pragma once

#include <optional>
#include <string>
#include <vector>

#include "minimax/problems.hpp"

namespace minimax {

enum class Method { GdaTT, EgTT, OdePlain, OdeEg, OdeEgTT };

enum class FieldKind { Plain, Eg, EgTT };

std::string to_string(Method m);
Method method_from_string(const std::string& name);
bool is_discrete(Method m);

// Step size η for the discrete maps, s for the continuous fields (s = η/2
// pairs a field with its discretization), timescale τ ≥ 1, RK4 step dt.
struct MethodParams {
  Method method = Method::EgTT;
  double eta = 0.1;
  double s = 0.05;
  double tau = 1.0;
  double dt = 1e-2;
};

// (√5 - 1)/(2L): below this the τ-EG map has a nonsingular Jacobian everywhere.
double eg_diffeomorphism_bound(double L);

// Throws ValidationError if params violate the step-size bounds for L.
// `for_avoidance` additionally enforces η < (√5 - 1)/(2L) for EG.
void validate_params(const MethodParams& params, double L, bool for_avoidance = false);

// z ↦ Λ_τ z with Λ_τ = diag{(1/τ)I_{d1}, I_{d2}}.
Vec apply_timescale(const Vec& v, Index d1, double tau);

// z - ηΛ_τF(z).
Vec step_gda_tt(const MinimaxProblem& problem, const Vec& z, double eta, double tau);

// z - ηΛ_τF(z - ηΛ_τF(z)); τ = 1 is plain extragradient.
Vec step_eg_tt(const MinimaxProblem& problem, const Vec& z, double eta, double tau);

// Plain: -F(z).  Eg: -(I + sDF)⁻¹F.  EgTT: -(I + sΛ_τDF)⁻¹Λ_τF.
// Throws SingularSolveError when the linear system is numerically singular.
Vec ode_field(const MinimaxProblem& problem, FieldKind kind, const Vec& z, double s, double tau);

struct Sample {
  long step = 0;
  double t = 0.0;
  Vec z;
  double F_norm = 0.0;
};

struct Termination {
  enum class Kind { Converged, MaxIters, Diverged };
  Kind kind = Kind::MaxIters;
  Vec z;                  // final iterate
  double residual = 0.0;  // ‖F(z)‖ at the final iterate
  double norm = 0.0;      // ‖z‖ at the final iterate
};

std::string to_string(Termination::Kind k);

struct Trajectory {
  std::vector<Sample> points;
  Termination termination;
  MethodParams params;
};

struct RunOptions {
  double tol_conv = 1e-10;
  long max_iters = 100000;
  double diverge_norm = 1e8;
  // Record every k-th iterate (the first and last are always recorded).
  long record_every = 1;
};

// Iterates step_gda_tt or step_eg_tt from z0.
Trajectory run_discrete(const MinimaxProblem& problem, const Vec& z0, const MethodParams& params,
                        const RunOptions& options = {});

// Classical fixed-step RK4 on ode_field up to t_end.
Trajectory integrate(const MinimaxProblem& problem, FieldKind kind, const Vec& z0, double s,
                     double tau, double dt, double t_end, const RunOptions& options = {});

// Dispatches on params.method: discrete methods iterate, ODE methods integrate
// up to t_end = dt * max_iters.
Trajectory run_method(const MinimaxProblem& problem, const Vec& z0, const MethodParams& params,
                      const RunOptions& options = {});

// Newton's method on F(z) = 0.
Vec find_stationary(const MinimaxProblem& problem, const Vec& z0, double newton_tol = 1e-12,
                    int newton_max = 50);

}  // namespace minimax
