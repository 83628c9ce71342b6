#pragma once

#include <optional>
#include <string>
#include <vector>

#include "minimax/problems.hpp"
#include "minimax/spectral.hpp"

namespace minimax {

// D̄_s = {z : |z + 1/(2s)| ≤ 1/(2s)}.
bool in_disk(Complex z, double s);
// Re(1/z) ≤ -s; z = 0 lies on the boundary and counts as inside.
bool in_disk_inverse(Complex z, double s);

// P_η = {x + iy : (ηx - ½)² + η²y² + ¾ < √(1 + 3η²y²)}.
bool in_peanut(Complex z, double eta);
// Re(1/(z(1 - ηz))) > η/2; false at z ∈ {0, 1/η}.
bool in_peanut_inverse(Complex z, double eta);

// -λ/(1 + sλ). Throws PreconditionError at the pole λ = -1/s.
Complex mobius_map(Complex lambda, double s);

// -(I + sH_τ)⁻¹H_τ. Throws SingularSolveError if I + sH_τ is singular.
Mat eg_jacobian_continuous(const Mat& H_tau, double s);

// I - ηH_τ(I - ηH_τ) with H_τ = Λ_τH.
Mat eg_jacobian_discrete(const Mat& H, Index d1, double eta, double tau);

enum class StabilityMethod { GdaTT, EgTTContinuous, EgTTDiscrete };
enum class Stability { Stable, Unstable, Marginal };

std::string to_string(StabilityMethod m);
std::string to_string(Stability s);

inline constexpr double kMarginalTol = 1e-8;

// Per-eigenvalue record. Margins are positive when the criterion holds:
//   disk      (|λ + 1/2s| - 1/2s)/|λ|          J side  -Re μ/|μ|
//   peanut    (√(1+3η²y²) - lhs)/(η|λ|)         J side  (1 - |κ|)/|1 - κ|
//   gda       (Re(1/λ) - η/2)·|λ|               J side  (1 - |κ|)/(η|λ|)
// Dividing by |λ| keeps the margins comparable when λ = O(√ε) is tiny.
struct EigenCheck {
  Complex lambda;        // eigenvalue of H_τ
  Complex jacobian_eig;  // matched eigenvalue of the method's Jacobian
  double region_margin = 0.0;
  double jacobian_margin = 0.0;
};

struct StabilityVerdict {
  StabilityMethod method = StabilityMethod::EgTTContinuous;
  double param = 0.0;  // s for the continuous method, η otherwise
  double tau = 1.0;
  Stability stable = Stability::Marginal;
  Stability region_side = Stability::Marginal;
  Stability jacobian_side = Stability::Marginal;
  CVec spec_H;  // spectrum of H_τ
  CVec spec_J;  // spectrum of the Jacobian
  std::vector<EigenCheck> checks;
};

// The two sides of each criterion are computed independently; if both are
// definite and disagree an InconsistencyError is thrown.
StabilityVerdict stability_continuous(const Mat& H, Index d1, double s, double tau,
                                      double marginal_tol = kMarginalTol);
StabilityVerdict stability_discrete(const Mat& H, Index d1, double eta, double tau,
                                    double marginal_tol = kMarginalTol);
StabilityVerdict gda_stability(const Mat& H, Index d1, double eta, double tau,
                               double marginal_tol = kMarginalTol);

StabilityVerdict stability(StabilityMethod method, const Mat& H, Index d1, double param, double tau,
                           double marginal_tol = kMarginalTol);

enum class Outcome { Stable, Unstable, Inconclusive };
std::string to_string(Outcome o);

struct InfinityVerdict {
  Outcome outcome = Outcome::Inconclusive;
  // First grid τ of the terminal run; NaN when inconclusive.
  double tau_star = 0.0;
  std::vector<double> tau_grid;
  std::vector<Stability> per_tau;
};

// 33 geometric points from 1 to 1e8.
std::vector<double> default_tau_grid();

// Evaluates the verdict along tau_grid and reports the terminal run of at
// least k_tail identical definite verdicts.
InfinityVerdict infinity_eg_verdict(const Mat& H, Index d1, double param, StabilityMethod method,
                                    const std::vector<double>& tau_grid = default_tau_grid(),
                                    int k_tail = 5, double marginal_tol = kMarginalTol);

struct CharacterizeConfig {
  double stationary_tol = 1e-8;
  double rank_tol = kDefaultRankTol;
  std::optional<double> psd_tol;
  std::vector<double> eps_grid = default_eps_grid();
  std::vector<double> tau_grid = default_tau_grid();
  int k_tail = 5;
  double marginal_tol = kMarginalTol;
  // Step sizes as fractions of 1/L (s for the ODE, η for the maps).
  std::vector<double> step_fractions = {0.1, 0.5, 0.9};
  // Predictions within this distance (in units of 1/L) of a threshold are left undetermined.
  double prediction_margin = 1e-2;
};

enum class Prediction { Stable, Unstable, Undetermined };
std::string to_string(Prediction p);

struct MethodVerdict {
  StabilityMethod method;
  double param = 0.0;
  Prediction predicted = Prediction::Undetermined;
  InfinityVerdict observed;
  bool mismatch = false;
};

struct EquilibriumReport {
  Vec point;
  double F_norm = 0.0;
  double lipschitz = 0.0;
  Index d1 = 0;
  Index d2 = 0;
  Index r = 0;
  Index w = 0;
  SecondOrderVerdict second_order;
  bool strict_non_minimax = false;
  Vec spec_Sres;  // ascending
  Vec spec_negB;  // nonzero eigenvalues of -B (D), canonical order
  Vec sigma;      // singular values of C₂, descending
  std::vector<double> iota;                     // numeric, per σ
  std::optional<std::vector<double>> iota_closed_form;  // when σ distinct
  std::optional<std::vector<double>> uSu;               // u_jᵀSu_j, when σ distinct
  std::optional<bool> refined_criterion;                // all u_jᵀSu_j ≥ 0
  double s0 = 0.0;
  std::vector<MethodVerdict> verdicts;
  std::vector<std::string> mismatches;
  // Smallest tested s (resp. η) observed stable for ∞-EG; NaN if none.
  double s_star = 0.0;
  double eta_star = 0.0;
};

// Classifies a stationary point: second-order conditions, hemicurvatures,
// s₀, predicted ∞-EG / GDA verdicts and the empirically searched ones.
// Throws PreconditionError if ‖F(z*)‖ > stationary_tol and
// SingularHessianError if H(z*) is singular.
EquilibriumReport characterize_equilibrium(const MinimaxProblem& problem, const Vec& z_star,
                                           const CharacterizeConfig& config = {});

}  // namespace minimax
