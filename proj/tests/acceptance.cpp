// One PASS/FAIL line per acceptance criterion; exit status is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "minimax/assignment.hpp"
#include "minimax/commands.hpp"
#include "minimax/dynamics.hpp"
#include "minimax/errors.hpp"
#include "minimax/spectral.hpp"
#include "minimax/stability.hpp"

using namespace minimax;

namespace {

int inconsistencies = 0;

struct Result {
  bool pass = true;
  std::string detail;
};

bool run(int id, const std::string& name, const std::function<Result()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Result o;
  try {
    o = body();
  } catch (const InconsistencyError& e) {
    ++inconsistencies;
    o = {false, std::string("dual-criterion mismatch: ") + e.what()};
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] %2d %-28s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
  return o.pass;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Mat bilinear_H() {
  Mat H(2, 2);
  H << 0, 1, -1, 0;
  return H;
}

Vec in_unit_ball(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v.normalized() * std::pow(u(rng), 1.0 / static_cast<double>(n));
}

Mat gaussian(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> g;
  Mat M(rows, cols);
  for (Index i = 0; i < M.size(); ++i) M(i) = g(rng);
  return M;
}

// Random blocks with rank(B) = r and a generic C.
HessianBlocks random_instance(std::mt19937_64& rng, Index d1, Index d2, Index r) {
  std::normal_distribution<double> g;
  const Mat A0 = gaussian(rng, d1, d1);
  const Mat P = Eigen::HouseholderQR<Mat>(gaussian(rng, d2, d2)).householderQ();
  Vec b = Vec::Zero(d2);
  for (Index i = 0; i < r; ++i) b(i) = (g(rng) > 0 ? 1.0 : -1.0) * (0.5 + std::abs(g(rng)));
  const Mat B = P * b.asDiagonal() * P.transpose();
  return {0.5 * (A0 + A0.transpose()), 0.5 * (B + B.transpose()), gaussian(rng, d1, d2)};
}

Result bilinear_spectrum() {
  double worst = 0.0;
  for (double tau : {10.0, 100.0, 1000.0}) {
    CVec expected(2);
    expected << Complex(0.0, std::sqrt(1.0 / tau)), Complex(0.0, -std::sqrt(1.0 / tau));
    worst = std::max(worst, multiset_distance(timescaled_spectrum(bilinear_H(), 1, tau), expected));
  }
  return {worst <= 1e-10, fmt("max error %.2e (tol 1e-10)", worst)};
}

Result bilinear_dynamics() {
  const auto bil = builtin_problem("bilinear");
  std::mt19937_64 rng(1);
  RunOptions opts;
  opts.tol_conv = 1e-6;
  opts.max_iters = 100000;
  MethodParams p;
  p.method = Method::EgTT;
  p.eta = 0.5;
  p.tau = 10.0;
  int eg_conv = 0;
  for (int i = 0; i < 100; ++i) {
    const auto t = run_discrete(bil, in_unit_ball(rng, 2), p, opts);
    if (t.termination.kind == Termination::Kind::Converged && t.termination.z.norm() <= 1e-6) ++eg_conv;
  }
  // The GDA iterate norm is measured in the Λ_τ⁻¹-weighted metric, in which
  // the map is an exact expansion; the Euclidean norm oscillates when τ > 1.
  p.method = Method::GdaTT;
  int gda_conv = 0;
  double worst_drop = 0.0;
  for (double tau : {1.0, 10.0, 100.0}) {
    p.tau = tau;
    for (int i = 0; i < 100; ++i) {
      const auto t = run_discrete(bil, in_unit_ball(rng, 2), p, opts);
      if (t.termination.kind == Termination::Kind::Converged) ++gda_conv;
      auto wnorm = [tau](const Vec& z) { return std::sqrt(tau * z(0) * z(0) + z(1) * z(1)); };
      for (size_t k = 1; k < t.points.size(); ++k) {
        const double prev = wnorm(t.points[k - 1].z), next = wnorm(t.points[k].z);
        worst_drop = std::max(worst_drop, (prev - next) / prev);
      }
    }
  }
  const bool pass = eg_conv == 100 && gda_conv == 0 && worst_drop <= 1e-12;
  return {pass, fmt("EG %.0f/100 converged; GDA %.0f/300 converged, max relative norm drop %.1e", eg_conv,
                    gda_conv, worst_drop)};
}

Result type_counts() {
  std::mt19937_64 rng(2024);
  const std::array<std::array<Index, 3>, 4> shapes{{{2, 1, 0}, {2, 2, 1}, {3, 2, 1}, {3, 3, 2}}};
  const std::array<double, 3> target{0.5, 1.0, 0.0};
  int instances = 0, count_ok = 0;
  double worst_slope = 0.0;
  for (const auto& s : shapes) {
    int made = 0;
    while (made < 50) {
      const HessianBlocks hb = random_instance(rng, s[0], s[1], s[2]);
      const Mat H = hb.jacobian();
      if (!is_invertible(H)) continue;
      ++made;
      ++instances;
      EigenCurveOptions opts;
      opts.require_labels = false;
      const auto curves = eigencurves(H, s[0], default_eps_grid(), opts);
      if (curves.labeled && curves.label_counts() == curves.expected_counts()) ++count_ok;
      for (Index j = 0; j < curves.size(); ++j) {
        const auto t = static_cast<size_t>(curves.type[j]);
        if (t < 3) worst_slope = std::max(worst_slope, std::abs(curves.slope[j] - target[t]));
      }
    }
  }
  return {count_ok == instances && worst_slope <= 0.1,
          fmt("%.0f/%.0f instances labeled exactly; max slope deviation %.3f (tol 0.1)", count_ok, instances,
              worst_slope)};
}

Result schur_oracles() {
  std::mt19937_64 rng(31);
  const std::array<std::array<Index, 3>, 5> shapes{{{2, 1, 0}, {3, 2, 1}, {3, 1, 0}, {4, 2, 1}, {3, 3, 2}}};
  double worst = 0.0;
  int separated = 0, agree = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto& s = shapes[trial % shapes.size()];
    const auto cb = canonicalize(random_instance(rng, s[0], s[1], s[2]));
    const auto rs = restricted_schur(cb);
    worst = std::max(worst, multiset_distance(mu_roots_oracle(cb), rs.eigenvalues().cast<Complex>()));
    const Vec ev = rs.eigenvalues();
    if (ev.size() == 0 || std::abs(ev(0)) >= 10 * default_psd_tol(rs.S_res)) {
      ++separated;
      if (rsc_subspace_oracle(cb, 200, 100 + trial) == second_order_necessary(cb).Sres_psd) ++agree;
    }
  }
  return {worst <= 1e-8 && agree == separated,
          fmt("pencil vs S_res max error %.2e (tol 1e-8); subspace oracle agrees %.0f/%.0f", worst, agree,
              separated)};
}

Result hemicurvature_examples() {
  double worst_numeric = 0.0, worst_closed = 0.0;
  for (auto [a, c] : {std::pair{2.0, 1.0}, {-2.0, 1.0}, {4.0, 3.0}}) {
    const auto p = scalar_degenerate(a, c);
    const HessianBlocks hb = hessian_blocks(p, Vec::Zero(2));
    const double expected = a / (2 * c * c);
    const auto curves = eigencurves(hb.jacobian(), 1, default_eps_grid());
    for (Index j = 0; j < curves.size(); ++j) {
      worst_numeric = std::max(worst_numeric, std::abs(curves.hemicurvature[j] - expected));
    }
    worst_closed = std::max(worst_closed, std::abs(hemicurvature_closed_form(canonicalize(hb), 0) - expected));
  }
  return {worst_numeric <= 1e-3 && worst_closed <= 1e-14,
          fmt("numeric max error %.2e (tol 1e-3); closed form max error %.1e", worst_numeric, worst_closed)};
}

// Smallest |region margin| over the eigenvalues of a verdict.
double boundary_distance(const StabilityVerdict& v) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : v.checks) m = std::min(m, std::abs(c.region_margin));
  return m;
}

Result dual_equivalence() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int disk = 0, disk_agree = 0, peanut = 0, peanut_agree = 0;
  while (disk < 500 || peanut < 500) {
    const Index n = 2 + rng() % 5;
    const Index d1 = 1 + rng() % (n - 1);
    const Mat H = gaussian(rng, n, n);
    const double L = spectral_norm(H);
    const double frac = 0.05 + 0.9 * u(rng);
    const double tau = std::pow(10.0, 4.0 * u(rng));
    if (disk < 500) {
      const auto v = stability_continuous(H, d1, frac / L, tau);
      if (boundary_distance(v) > 1e-6) {
        ++disk;
        if (v.region_side == v.jacobian_side) ++disk_agree;
      }
    }
    if (peanut < 500) {
      const auto v = stability_discrete(H, d1, frac / L, tau);
      if (boundary_distance(v) > 1e-6) {
        ++peanut;
        if (v.region_side == v.jacobian_side) ++peanut_agree;
      }
    }
  }
  return {disk_agree == 500 && peanut_agree == 500,
          fmt("disk %.0f/500, peanut %.0f/500 agree", disk_agree, peanut_agree)};
}

Result region_geometry() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double s = 0.05 + u(rng);
    const double t = std::tan(3.1 * (u(rng) - 0.5));
    const Complex mu = mobius_map(Complex(0.0, t), s);
    worst = std::max(worst, std::abs(std::abs(mu + 0.5 / s) - 0.5 / s));
  }
  int in_both = 0;
  for (int pair = 0; pair < 20; ++pair) {
    const double a = 0.01 + 5 * u(rng), eta = 0.05 + 3 * u(rng);
    for (int i = 0; i < 10000; ++i) {
      const double r = 0.5 * a * std::sqrt(u(rng)), th = 6.283185307179586 * u(rng);
      if (in_peanut(Complex(-a + r * std::cos(th), r * std::sin(th)), eta)) ++in_both;
    }
  }
  int segment_out = 0;
  for (int i = 0; i < 100; ++i) {
    const double eta = 0.05 + u(rng);
    const double t = (1e-9 + (1 - 2e-9) * u(rng)) / eta;
    if (!in_peanut(Complex(0.0, t), eta) || !in_peanut(Complex(0.0, -t), eta)) ++segment_out;
  }
  return {worst <= 1e-10 && in_both == 0 && segment_out == 0,
          fmt("boundary error %.1e (tol 1e-10); %.0f disk samples in peanut; %.0f segment samples outside", worst,
              in_both, segment_out)};
}

Result sufficiency() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  int stable = 0, total = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index d1 = 1 + trial % 3, d2 = 1 + (trial / 3) % 3;
    // S = GGᵀ + δI ≻ 0 and B = -(KKᵀ + δI) ≺ 0, then A = S + CB⁻¹Cᵀ.
    const Mat G = gaussian(rng, d1, d1), K = gaussian(rng, d2, d2), C = gaussian(rng, d1, d2);
    const Mat S = G * G.transpose() + 0.1 * Mat::Identity(d1, d1);
    const Mat B = -(K * K.transpose() + 0.1 * Mat::Identity(d2, d2));
    Mat A = S + C * B.inverse() * C.transpose();
    A = (0.5 * (A + A.transpose())).eval();
    const Mat H = HessianBlocks{A, B, C}.jacobian();
    const double L = spectral_norm(H);
    for (double f : {0.1, 0.5, 0.9}) {
      for (auto m : {StabilityMethod::EgTTContinuous, StabilityMethod::EgTTDiscrete}) {
        ++total;
        if (infinity_eg_verdict(H, d1, f / L, m).outcome == minimax::Outcome::Stable) ++stable;
      }
    }
  }
  return {stable == total, fmt("%.0f/%.0f verdicts stable", stable, total)};
}

Result avoidance() {
  const auto out = std::filesystem::temp_directory_path() / "minimax_acceptance_avoidance";
  ExperimentConfig cfg;
  cfg.problem.builtin = "strict_nonminimax_demo";
  cfg.params.method = Method::EgTT;
  cfg.params.eta = 0.25;  // (√5 - 1)/(2L) ≈ 0.309 for L = 2
  cfg.eta_set = true;
  cfg.n = 500;
  cfg.seed = 2;
  cfg.write_trajectories = false;
  cfg.out_dir = out.string();
  const auto res = cmd_avoidance(cfg);
  std::filesystem::remove_all(out);
  const double fraction = res.summary["fraction"].get<double>();
  const bool from_verdict = res.summary["tau_source"] == "infinity_eg_verdict";
  return {fraction == 0.0 && from_verdict,
          fmt("fraction %.4f over 500 inits at tau %.3g (tau from infinity verdict: %.0f)", fraction,
              res.summary["params"]["tau"].get<double>(), from_verdict)};
}

}  // namespace

int main() {
  int failed = 0;
  failed += !run(1, "bilinear spectrum", bilinear_spectrum);
  failed += !run(2, "bilinear dynamics", bilinear_dynamics);
  failed += !run(3, "eigencurve type counts", type_counts);
  failed += !run(4, "restricted Schur oracles", schur_oracles);
  failed += !run(5, "hemicurvature", hemicurvature_examples);
  failed += !run(6, "dual criterion equivalence", dual_equivalence);
  failed += !run(7, "region geometry", region_geometry);
  failed += !run(8, "sufficiency spot-check", sufficiency);
  failed += !run(9, "avoidance of demo saddle", avoidance);
  failed += !run(10, "no consistency errors", [] {
    return Result{inconsistencies == 0, fmt("%.0f mismatch errors raised", inconsistencies)};
  });
  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
