#include "minimax/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "minimax/assignment.hpp"
#include "minimax/dynamics.hpp"
#include "minimax/errors.hpp"

namespace minimax {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

CVec eigenvalues_of(const Mat& M, const char* what) {
  Eigen::EigenSolver<Mat> es(M, false);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError(std::string(what) + ": eigensolver failed");
  }
  return es.eigenvalues();
}

Stability side_verdict(const std::vector<double>& margins, double tol) {
  double lo = kInf;
  for (double m : margins) lo = std::min(lo, m);
  if (margins.empty() || lo > tol) return Stability::Stable;
  if (lo < -tol) return Stability::Unstable;
  return Stability::Marginal;
}

double peanut_lhs(Complex z, double eta) {
  const double x = z.real(), y = z.imag();
  return (eta * x - 0.5) * (eta * x - 0.5) + eta * eta * y * y + 0.75;
}

double peanut_rhs(Complex z, double eta) {
  const double y = z.imag();
  return std::sqrt(1.0 + 3.0 * eta * eta * y * y);
}

// Pairs each H_τ eigenvalue with the Jacobian eigenvalue closest to its
// predicted image, fills the margins and reconciles the two sides.
template <typename ImageFn, typename RegionMarginFn, typename JacMarginFn>
StabilityVerdict assemble(StabilityMethod method, double param, double tau, const CVec& spec_H,
                          const CVec& spec_J, ImageFn image, RegionMarginFn region_margin,
                          JacMarginFn jac_margin, double tol) {
  StabilityVerdict v;
  v.method = method;
  v.param = param;
  v.tau = tau;
  v.spec_H = spec_H;
  v.spec_J = spec_J;

  const Index n = spec_H.size();
  CVec images(n);
  for (Index i = 0; i < n; ++i) images(i) = image(spec_H(i));
  const std::vector<Index> perm = match_eigenvalues(images, spec_J);

  std::vector<double> region, jac;
  for (Index i = 0; i < n; ++i) {
    EigenCheck c;
    c.lambda = spec_H(i);
    c.jacobian_eig = spec_J(perm[i]);
    c.region_margin = region_margin(c.lambda);
    c.jacobian_margin = jac_margin(c.jacobian_eig);
    region.push_back(c.region_margin);
    jac.push_back(c.jacobian_margin);
    v.checks.push_back(c);
  }
  v.region_side = side_verdict(region, tol);
  v.jacobian_side = side_verdict(jac, tol);

  const bool definite = v.region_side != Stability::Marginal && v.jacobian_side != Stability::Marginal;
  if (definite && v.region_side != v.jacobian_side) {
    std::ostringstream msg;
    msg << to_string(method) << " at param " << param << ", tau " << tau
        << ": region criterion says " << to_string(v.region_side) << " but Jacobian says "
        << to_string(v.jacobian_side);
    throw InconsistencyError(msg.str());
  }
  v.stable = v.region_side == v.jacobian_side ? v.region_side : Stability::Marginal;
  return v;
}

void check_square(const Mat& H, Index d1) {
  if (H.rows() != H.cols() || d1 <= 0 || d1 >= H.rows()) {
    throw ValidationError("H must be square with 0 < d1 < dim");
  }
}

void check_step(double step, const Mat& H, const char* name) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ValidationError(std::string(name) + " must be positive");
  }
  const double L = spectral_norm(H);
  if (L > 0.0 && !(step * L < 1.0)) {
    throw PreconditionError(std::string(name) + " must be below 1/L = " + std::to_string(1.0 / L));
  }
}

}  // namespace

bool in_disk(Complex z, double s) {
  if (!(s > 0.0)) throw ValidationError("in_disk: s must be positive");
  const double c = 0.5 / s;
  return std::abs(z + c) <= c;
}

bool in_disk_inverse(Complex z, double s) {
  if (!(s > 0.0)) throw ValidationError("in_disk_inverse: s must be positive");
  if (z == Complex(0.0, 0.0)) return true;
  return (1.0 / z).real() <= -s;
}

bool in_peanut(Complex z, double eta) {
  if (!(eta > 0.0)) throw ValidationError("in_peanut: eta must be positive");
  return peanut_lhs(z, eta) < peanut_rhs(z, eta);
}

bool in_peanut_inverse(Complex z, double eta) {
  if (!(eta > 0.0)) throw ValidationError("in_peanut_inverse: eta must be positive");
  const Complex q = z * (1.0 - eta * z);
  if (q == Complex(0.0, 0.0)) return false;
  return (1.0 / q).real() > 0.5 * eta;
}

Complex mobius_map(Complex lambda, double s) {
  const Complex den = 1.0 + s * lambda;
  if (den == Complex(0.0, 0.0)) {
    throw PreconditionError("mobius_map: pole at lambda = -1/s");
  }
  return -lambda / den;
}

Mat eg_jacobian_continuous(const Mat& H_tau, double s) {
  const Index n = H_tau.rows();
  Eigen::PartialPivLU<Mat> lu(Mat::Identity(n, n) + s * H_tau);
  if (!(lu.rcond() > 1e-12)) {
    throw SingularSolveError("eg_jacobian_continuous: I + sH_tau is numerically singular");
  }
  return -lu.solve(H_tau);
}

Mat eg_jacobian_discrete(const Mat& H, Index d1, double eta, double tau) {
  const Index n = H.rows();
  const Mat Ht = timescaled_hessian(H, d1, tau);
  const Mat I = Mat::Identity(n, n);
  return I - eta * Ht * (I - eta * Ht);
}

std::string to_string(StabilityMethod m) {
  switch (m) {
    case StabilityMethod::GdaTT: return "gda_tt";
    case StabilityMethod::EgTTContinuous: return "eg_tt_continuous";
    case StabilityMethod::EgTTDiscrete: return "eg_tt_discrete";
  }
  return "unknown";
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Marginal: return "marginal";
  }
  return "marginal";
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Stable: return "stable";
    case Outcome::Unstable: return "unstable";
    case Outcome::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(Prediction p) {
  switch (p) {
    case Prediction::Stable: return "stable";
    case Prediction::Unstable: return "unstable";
    case Prediction::Undetermined: return "undetermined";
  }
  return "undetermined";
}

// All three work in the balanced coordinates Λ^{1/2}HΛ^{1/2}, which share
// every spectrum below with the unbalanced H_τ.
StabilityVerdict stability_continuous(const Mat& H, Index d1, double s, double tau,
                                      double marginal_tol) {
  check_square(H, d1);
  check_step(s, H, "s");
  const Mat M = balanced_timescaled_hessian(H, d1, tau);
  const CVec spec_H = eigenvalues_of(M, "stability_continuous");
  const CVec spec_J = eigenvalues_of(eg_jacobian_continuous(M, s), "stability_continuous");
  const double c = 0.5 / s;
  return assemble(
      StabilityMethod::EgTTContinuous, s, tau, spec_H, spec_J,
      [s](Complex l) { return mobius_map(l, s); },
      [c](Complex l) {
        const double a = std::abs(l);
        return a > 0.0 ? (std::abs(l + c) - c) / a : 0.0;
      },
      [](Complex mu) {
        const double a = std::abs(mu);
        return a > 0.0 ? -mu.real() / a : 0.0;
      },
      marginal_tol);
}

StabilityVerdict stability_discrete(const Mat& H, Index d1, double eta, double tau,
                                    double marginal_tol) {
  check_square(H, d1);
  check_step(eta, H, "eta");
  const Index n = H.rows();
  const Mat M = balanced_timescaled_hessian(H, d1, tau);
  const Mat I = Mat::Identity(n, n);
  const CVec spec_H = eigenvalues_of(M, "stability_discrete");
  const CVec spec_J = eigenvalues_of(I - eta * M * (I - eta * M), "stability_discrete");
  return assemble(
      StabilityMethod::EgTTDiscrete, eta, tau, spec_H, spec_J,
      [eta](Complex l) { return 1.0 - eta * l * (1.0 - eta * l); },
      [eta](Complex l) {
        const double a = std::abs(l);
        return a > 0.0 ? (peanut_rhs(l, eta) - peanut_lhs(l, eta)) / (eta * a) : 0.0;
      },
      [](Complex k) {
        const double a = std::abs(1.0 - k);
        return a > 0.0 ? (1.0 - std::abs(k)) / a : 0.0;
      },
      marginal_tol);
}

StabilityVerdict gda_stability(const Mat& H, Index d1, double eta, double tau, double marginal_tol) {
  check_square(H, d1);
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be positive");
  const Index n = H.rows();
  const Mat M = balanced_timescaled_hessian(H, d1, tau);
  const CVec spec_H = eigenvalues_of(M, "gda_stability");
  const CVec spec_J = eigenvalues_of(Mat::Identity(n, n) - eta * M, "gda_stability");
  return assemble(
      StabilityMethod::GdaTT, eta, tau, spec_H, spec_J, [eta](Complex l) { return 1.0 - eta * l; },
      [eta](Complex l) {
        const double a = std::abs(l);
        return a > 0.0 ? ((1.0 / l).real() - 0.5 * eta) * a : 0.0;
      },
      [eta](Complex k) {
        const double a = std::abs(1.0 - k);
        return a > 0.0 ? (1.0 - std::abs(k)) / a : 0.0;
      },
      marginal_tol);
}

StabilityVerdict stability(StabilityMethod method, const Mat& H, Index d1, double param, double tau,
                           double marginal_tol) {
  switch (method) {
    case StabilityMethod::GdaTT: return gda_stability(H, d1, param, tau, marginal_tol);
    case StabilityMethod::EgTTContinuous: return stability_continuous(H, d1, param, tau, marginal_tol);
    case StabilityMethod::EgTTDiscrete: return stability_discrete(H, d1, param, tau, marginal_tol);
  }
  throw ValidationError("unknown stability method");
}

std::vector<double> default_tau_grid() {
  std::vector<double> g = geometric_grid(1.0, 1e8, 33);
  return g;
}

InfinityVerdict infinity_eg_verdict(const Mat& H, Index d1, double param, StabilityMethod method,
                                    const std::vector<double>& tau_grid, int k_tail,
                                    double marginal_tol) {
  for (size_t k = 0; k < tau_grid.size(); ++k) {
    if (!(tau_grid[k] >= 1.0) || (k > 0 && !(tau_grid[k] > tau_grid[k - 1]))) {
      throw ValidationError("tau grid must be increasing with entries >= 1");
    }
  }
  InfinityVerdict out;
  out.tau_grid = tau_grid;
  for (double tau : tau_grid) {
    out.per_tau.push_back(stability(method, H, d1, param, tau, marginal_tol).stable);
  }
  out.outcome = Outcome::Inconclusive;
  out.tau_star = kNaN;
  if (out.per_tau.empty()) return out;

  const Stability last = out.per_tau.back();
  if (last == Stability::Marginal) return out;
  size_t start = out.per_tau.size() - 1;
  while (start > 0 && out.per_tau[start - 1] == last) --start;
  const size_t run = out.per_tau.size() - start;
  if (static_cast<int>(run) >= std::max(k_tail, 1)) {
    out.outcome = last == Stability::Stable ? Outcome::Stable : Outcome::Unstable;
    out.tau_star = tau_grid[start];
  }
  return out;
}

namespace {

// Asymptotic prediction from the canonical data. `threshold` is the quantity
// the hemicurvatures are compared against: ι > -threshold for the EG methods
// (threshold = s or η/2), ι > threshold for GDA (threshold = η/2).
Prediction predict(const EquilibriumReport& rep, StabilityMethod method, double param,
                   double margin, double tol_mu, double tol_nu) {
  bool undetermined = false;
  for (Index i = 0; i < rep.spec_Sres.size(); ++i) {
    if (rep.spec_Sres(i) < -tol_mu) return Prediction::Unstable;
    if (rep.spec_Sres(i) <= tol_mu) undetermined = true;
  }
  for (Index i = 0; i < rep.spec_negB.size(); ++i) {
    if (rep.spec_negB(i) < -tol_nu) return Prediction::Unstable;
    if (rep.spec_negB(i) <= tol_nu) undetermined = true;
  }
  if (!rep.iota.empty()) {
    double gap;  // positive ⇒ stable
    if (method == StabilityMethod::GdaTT) {
      const double lo = *std::min_element(rep.iota.begin(), rep.iota.end());
      gap = lo - 0.5 * param;
    } else {
      const double threshold = method == StabilityMethod::EgTTContinuous ? param : 0.5 * param;
      gap = threshold - rep.s0;
    }
    if (std::isnan(gap)) return Prediction::Undetermined;
    if (gap < -margin) return Prediction::Unstable;
    if (gap <= margin) undetermined = true;
  }
  return undetermined ? Prediction::Undetermined : Prediction::Stable;
}

}  // namespace

EquilibriumReport characterize_equilibrium(const MinimaxProblem& problem, const Vec& z_star,
                                           const CharacterizeConfig& config) {
  EquilibriumReport rep;
  rep.point = z_star;
  rep.F_norm = saddle_gradient(problem, z_star).norm();
  if (!(rep.F_norm <= config.stationary_tol)) {
    throw PreconditionError("characterize_equilibrium: point is not stationary (|F| = " +
                            std::to_string(rep.F_norm) + ")");
  }
  rep.lipschitz = problem.lipschitz_bound();
  rep.d1 = problem.d1();
  rep.d2 = problem.d2();

  const HessianBlocks hb = hessian_blocks(problem, z_star);
  const Mat H = hb.jacobian();
  if (!is_invertible(H)) {
    throw SingularHessianError("characterize_equilibrium: H = DF(z*) is singular");
  }
  const CanonicalBlocks cb = canonicalize(hb, config.rank_tol);
  const RestrictedSchur rs = restricted_schur(cb);
  rep.r = cb.r;
  rep.w = rs.w();
  rep.second_order = second_order_necessary(cb, config.psd_tol);
  rep.strict_non_minimax = is_strict_non_minimax(cb, config.psd_tol);
  rep.spec_Sres = rs.eigenvalues();
  rep.spec_negB = cb.D();

  EigenCurveOptions opts;
  opts.rank_tol = config.rank_tol;
  const EigenCurves curves = eigencurves(H, rep.d1, config.eps_grid, opts);
  rep.sigma = curves.sigma;
  rep.iota.assign(curves.sigma.size(), kNaN);
  for (Index j = 0; j < curves.size(); ++j) {
    const Index k = curves.sigma_index[j];
    if (k >= 0 && std::isnan(rep.iota[k])) rep.iota[k] = curves.hemicurvature[j];
  }
  rep.s0 = s_zero(curves);

  // Closed form and the refined u_jᵀSu_j ≥ 0 criterion need distinct σ.
  try {
    std::vector<double> closed, usu;
    for (Index j = 0; j < rep.sigma.size(); ++j) {
      const double iota = hemicurvature_closed_form(cb, j);
      closed.push_back(iota);
      usu.push_back(2.0 * iota * rep.sigma(j) * rep.sigma(j));
    }
    if (!closed.empty()) {
      rep.iota_closed_form = closed;
      rep.uSu = usu;
      rep.refined_criterion = std::all_of(usu.begin(), usu.end(), [](double v) { return v >= 0.0; });
    }
  } catch (const PreconditionError&) {
  }

  const double L = rep.lipschitz;
  const double tol_mu = config.psd_tol.value_or(default_psd_tol(rs.S_res));
  const double tol_nu = config.psd_tol.value_or(default_psd_tol(cb.B));
  const double margin = config.prediction_margin / L;
  rep.s_star = kNaN;
  rep.eta_star = kNaN;
  for (StabilityMethod method :
       {StabilityMethod::EgTTContinuous, StabilityMethod::EgTTDiscrete, StabilityMethod::GdaTT}) {
    for (double frac : config.step_fractions) {
      MethodVerdict mv;
      mv.method = method;
      mv.param = frac / L;
      mv.predicted = predict(rep, method, mv.param, margin, tol_mu, tol_nu);
      mv.observed = infinity_eg_verdict(H, rep.d1, mv.param, method, config.tau_grid, config.k_tail,
                                        config.marginal_tol);
      const Outcome o = mv.observed.outcome;
      mv.mismatch = (mv.predicted == Prediction::Stable && o == Outcome::Unstable) ||
                    (mv.predicted == Prediction::Unstable && o == Outcome::Stable);
      if (mv.mismatch) {
        std::ostringstream msg;
        msg << to_string(method) << " param " << mv.param << ": predicted "
            << to_string(mv.predicted) << ", observed " << to_string(o);
        rep.mismatches.push_back(msg.str());
      }
      if (o == Outcome::Stable) {
        if (method == StabilityMethod::EgTTContinuous) {
          rep.s_star = std::isnan(rep.s_star) ? mv.param : std::min(rep.s_star, mv.param);
        } else if (method == StabilityMethod::EgTTDiscrete) {
          rep.eta_star = std::isnan(rep.eta_star) ? mv.param : std::min(rep.eta_star, mv.param);
        }
      }
      rep.verdicts.push_back(std::move(mv));
    }
  }
  return rep;
}

}  // namespace minimax
