#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "minimax/assignment.hpp"
#include "minimax/errors.hpp"
#include "minimax/spectral.hpp"

using namespace minimax;

namespace {

Mat m11(double v) { return Mat::Constant(1, 1, v); }

HessianBlocks blocks_of(const char* name, std::map<std::string, double> params = {}) {
  const auto p = builtin_problem(name, params);
  return hessian_blocks(p, Vec::Zero(p.dim()));
}

HessianBlocks example_res_minus5() {
  Mat A = Mat::Zero(2, 2);
  A(0, 0) = 3.0;
  A(1, 1) = -5.0;
  Mat C = Mat::Zero(2, 1);
  C(0, 0) = 1.0;
  return {A, Mat::Zero(1, 1), C};
}

}  // namespace

TEST_CASE("canonicalize examples") {
  const auto bil = canonicalize(blocks_of("bilinear"));
  CHECK(bil.r == 0);
  CHECK(bil.C1().cols() == 0);
  CHECK(std::abs(std::abs(bil.C2()(0, 0)) - 1.0) < 1e-15);

  Mat B = Mat::Zero(2, 2);
  B(0, 0) = -2.0;
  Mat C(1, 2);
  C << 3.0, 4.0;
  const auto cb = canonicalize({m11(1.0), B, C});
  CHECK(cb.r == 1);
  CHECK(cb.D()(0) == doctest::Approx(2.0));
  CHECK(std::abs(std::abs(cb.C1()(0, 0)) - 3.0) < 1e-14);
  CHECK(std::abs(std::abs(cb.C2()(0, 0)) - 4.0) < 1e-14);

  Mat B2(2, 2);
  B2 << -1, 1, 1, -1;
  const auto c2 = canonicalize({m11(0.0), B2, Mat::Ones(1, 2)});
  CHECK(c2.r == 1);
  CHECK(c2.b(0) == doctest::Approx(-2.0));
  CHECK(c2.b(1) == 0.0);
  CHECK((c2.P * c2.B_diag() * c2.P.transpose() - B2).cwiseAbs().maxCoeff() < 1e-10);
  // The rotation by 45 degrees: first column ∝ (1, -1).
  CHECK(std::abs(std::abs(c2.P(0, 0)) - std::sqrt(0.5)) < 1e-12);
  CHECK(std::abs(c2.P(0, 0) + c2.P(1, 0)) < 1e-12);
}

TEST_CASE("canonicalize invariants on random blocks") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const Index d1 = 1 + trial % 3, d2 = 1 + (trial / 3) % 3, r = trial % (d2 + 1);
    Mat G(d2, r);
    for (Index i = 0; i < G.size(); ++i) G(i) = g(rng);
    const Mat B = -G * G.transpose();
    Mat A(d1, d1), C(d1, d2);
    for (Index i = 0; i < A.size(); ++i) A(i) = g(rng);
    for (Index i = 0; i < C.size(); ++i) C(i) = g(rng);
    A = (A + A.transpose()).eval();
    const auto cb = canonicalize({A, B, C});
    CHECK(cb.r == r);
    CHECK((cb.P * cb.B_diag() * cb.P.transpose() - B).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((cb.P.transpose() * cb.P - Mat::Identity(d2, d2)).cwiseAbs().maxCoeff() < 1e-12);
    const double bn = B.size() ? Eigen::JacobiSVD<Mat>(B).singularValues()(0) : 0.0;
    for (Index i = 0; i < d2; ++i) {
      if (i < cb.r) CHECK(std::abs(cb.b(i)) > kDefaultRankTol * bn);
      else CHECK(std::abs(cb.b(i)) <= kDefaultRankTol * bn);
    }
  }
}

TEST_CASE("restricted_schur examples") {
  const auto bil = restricted_schur(canonicalize(blocks_of("bilinear")));
  CHECK(bil.vacuous());

  const auto inv = restricted_schur(canonicalize({m11(2.0), m11(-1.0), m11(1.0)}));
  CHECK(inv.w() == 1);
  CHECK(inv.S_res(0, 0) == doctest::Approx(3.0));

  const auto cb = canonicalize(example_res_minus5());
  const auto rs = restricted_schur(cb);
  REQUIRE(rs.w() == 1);
  CHECK(std::abs(std::abs(rs.U(1, 0)) - 1.0) < 1e-12);
  CHECK(rs.S_res(0, 0) == doctest::Approx(-5.0));
  CHECK((rs.U.transpose() * rs.U - Mat::Identity(1, 1)).norm() < 1e-12);
  CHECK((cb.C2().transpose() * rs.U).norm() < 1e-10);
}

TEST_CASE("rsc_subspace_oracle examples") {
  CHECK(rsc_subspace_oracle(canonicalize(blocks_of("bilinear")), 20, 1));
  CHECK_FALSE(rsc_subspace_oracle(canonicalize(example_res_minus5()), 20, 1));
  Mat A(2, 2);
  A << 2, 0.5, 0.5, 1;
  CHECK(rsc_subspace_oracle(canonicalize({A, m11(-1.0), Mat::Zero(2, 1)}), 20, 1));
}

TEST_CASE("second_order_necessary and strict non-minimax examples") {
  const auto bil = second_order_necessary(canonicalize(blocks_of("bilinear")));
  CHECK(bil.B_nsd);
  CHECK(bil.Sres_psd);
  CHECK_FALSE(is_strict_non_minimax(canonicalize(blocks_of("bilinear"))));

  const auto pos = canonicalize({m11(1.0), m11(1.0), m11(1.0)});
  CHECK_FALSE(second_order_necessary(pos).B_nsd);
  CHECK(is_strict_non_minimax(pos));

  const auto sd = second_order_necessary(canonicalize(blocks_of("scalar_degenerate", {{"a", 2}, {"c", 1}})));
  CHECK(sd.B_nsd);
  CHECK(sd.Sres_psd);

  CHECK(is_strict_non_minimax(canonicalize(example_res_minus5())));

  const auto demo = canonicalize(blocks_of("strict_nonminimax_demo"));
  CHECK(is_strict_non_minimax(demo));
  CHECK(restricted_schur(demo).eigenvalues()(0) == doctest::Approx(-1.0));
}

TEST_CASE("marginal flags mark verdicts decided by the tolerance") {
  const auto v = second_order_necessary(canonicalize({m11(-1e-12), m11(0.0), m11(0.0)}));
  CHECK(v.Sres_psd);
  CHECK(v.Sres_marginal);
  const auto w = second_order_necessary(canonicalize({m11(1.0), m11(-1.0), m11(1.0)}));
  CHECK_FALSE(w.Sres_marginal);
  CHECK_FALSE(w.B_marginal);
}

TEST_CASE("timescaled_hessian examples") {
  Mat H(2, 2);
  H << 0, 1, -1, 0;
  Mat expected(2, 2);
  expected << 0, 0.25, -1, 0;
  CHECK((timescaled_hessian(H, 1, 4.0) - expected).norm() == 0.0);
  CHECK((timescaled_hessian(H, 1, 1.0) - H).norm() == 0.0);

  Mat R = Mat::Random(5, 5);
  const Mat T = timescaled_hessian(R, 2, 4.0);
  CHECK((T.topRows(2) - 0.25 * R.topRows(2)).norm() == 0.0);
  CHECK((T.bottomRows(3) - R.bottomRows(3)).norm() == 0.0);
}

TEST_CASE("eigencurves: bilinear") {
  const Mat H = blocks_of("bilinear").jacobian();
  const auto curves = eigencurves(H, 1, default_eps_grid());
  REQUIRE(curves.labeled);
  CHECK(curves.type[0] == CurveType::SqrtEpsPair);
  CHECK(curves.type[1] == CurveType::SqrtEpsPair);
  CHECK(curves.sigma(0) == doctest::Approx(1.0));
  for (size_t k = 0; k < curves.eps_grid.size(); ++k) {
    const double root = std::sqrt(curves.eps_grid[k]);
    CHECK(std::abs(curves.lambda(k, 0) - Complex(0, root)) < 1e-12 * std::max(1.0, root) + 1e-15);
    CHECK(std::abs(curves.lambda(k, 1) - Complex(0, -root)) < 1e-12 * std::max(1.0, root) + 1e-15);
  }
  CHECK(std::abs(hemicurvature(curves, 0)) < 1e-6);
  CHECK(std::abs(s_zero(curves)) < 1e-6);
}

TEST_CASE("eigencurves: invertible B") {
  const Mat H = HessianBlocks{m11(2.0), m11(-1.0), m11(1.0)}.jacobian();
  const auto curves = eigencurves(H, 1, default_eps_grid());
  REQUIRE(curves.labeled);
  CHECK(curves.type[0] == CurveType::LinearEps);
  CHECK(curves.type[1] == CurveType::OrderOne);
  const Index m = static_cast<Index>(curves.eps_grid.size());
  CHECK(std::abs(curves.lambda(m - 1, 0) / curves.eps_grid.back() - 3.0) < 1e-4);
  CHECK(std::abs(curves.lambda(m - 1, 1) - 1.0) < 1e-4);
  CHECK(std::isinf(s_zero(curves)));
  CHECK(s_zero(curves) < 0);
}

TEST_CASE("eigencurves: scalar_degenerate closed form") {
  const Mat H = blocks_of("scalar_degenerate", {{"a", 2}, {"c", 1}}).jacobian();
  const auto curves = eigencurves(H, 1, default_eps_grid());
  REQUIRE(curves.labeled);
  for (size_t k = 0; k < curves.eps_grid.size(); ++k) {
    const double e = curves.eps_grid[k];
    const Complex exact(e, std::sqrt(e * (1.0 - e)));
    CHECK(std::abs(curves.lambda(k, 0) - exact) < 1e-12);
    CHECK(std::abs(curves.lambda(k, 1) - std::conj(exact)) < 1e-12);
  }
  CHECK(curves.slope[0] == doctest::Approx(0.5).epsilon(0.01));
  CHECK(hemicurvature(curves, 0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(s_zero(curves) == doctest::Approx(-1.0).epsilon(1e-3));

  const Mat Hn = blocks_of("scalar_degenerate", {{"a", -2}, {"c", 1}}).jacobian();
  const auto neg = eigencurves(Hn, 1, default_eps_grid());
  CHECK(hemicurvature(neg, 0) == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(s_zero(neg) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("eigencurves errors") {
  Mat H = Mat::Zero(2, 2);
  CHECK_THROWS_AS(eigencurves(H, 1, default_eps_grid()), SingularHessianError);
  const Mat Hb = blocks_of("bilinear").jacobian();
  CHECK_THROWS_AS(eigencurves(Hb, 1, {1e-2, 1e-1}), ValidationError);
  CHECK_THROWS_AS(eigencurves(Hb, 1, {2.0, 1e-1}), ValidationError);
  // Too coarse to see the asymptotics: labels fail loudly unless relaxed.
  const Mat Hq = HessianBlocks{m11(2.0), m11(-1.0), m11(1.0)}.jacobian();
  CHECK_THROWS_AS(eigencurves(Hq, 1, {1.0, 0.9}), ClassificationError);
  EigenCurveOptions relaxed;
  relaxed.require_labels = false;
  CHECK_FALSE(eigencurves(Hq, 1, {1.0, 0.9}, relaxed).labeled);
  CHECK(eigencurves(Hb, 1, {}, relaxed).lambda.rows() == 0);
}

TEST_CASE("hemicurvature detects divergence") {
  // λ(ε) = -ε^{3/4} ± i√ε has Re(1/λ) ≈ -ε^{-1/4}.
  EigenCurves c;
  c.eps_grid = default_eps_grid();
  c.lambda = CMat(c.eps_grid.size(), 2);
  for (size_t k = 0; k < c.eps_grid.size(); ++k) {
    const double e = c.eps_grid[k];
    c.lambda(k, 0) = Complex(-std::pow(e, 0.75), std::sqrt(e));
    c.lambda(k, 1) = std::conj(c.lambda(k, 0));
  }
  c.type = {CurveType::SqrtEpsPair, CurveType::SqrtEpsPair};
  c.hemicurvature = {hemicurvature(c, 0), hemicurvature(c, 1)};
  CHECK(c.hemicurvature[0] == -std::numeric_limits<double>::infinity());
  CHECK(s_zero(c) == std::numeric_limits<double>::infinity());
}

TEST_CASE("hemicurvature closed form") {
  for (auto [a, c] : {std::pair{2.0, 1.0}, {-2.0, 1.0}, {4.0, 3.0}}) {
    const auto cb = canonicalize(blocks_of("scalar_degenerate", {{"a", a}, {"c", c}}));
    CHECK(hemicurvature_closed_form(cb, 0) == doctest::Approx(a / (2 * c * c)).epsilon(1e-14));
  }
  CHECK(hemicurvature_closed_form(canonicalize(blocks_of("bilinear")), 0) == 0.0);

  Mat A = Mat::Zero(2, 2);
  A(0, 0) = 4.0;
  A(1, 1) = -4.0;
  Mat C = Mat::Zero(2, 1);
  C(0, 0) = 1.0;
  const HessianBlocks hb{A, Mat::Zero(1, 1), C};
  CHECK(hemicurvature_closed_form(canonicalize(hb), 0) == doctest::Approx(2.0));
  REQUIRE(is_invertible(hb.jacobian()));
  const auto curves = eigencurves(hb.jacobian(), 2, default_eps_grid());
  CHECK(std::abs(curves.hemicurvature[0] - 2.0) < 1e-3);

  // Repeated singular values are refused.
  const HessianBlocks rep{Mat::Identity(2, 2), Mat::Zero(2, 2), Mat::Identity(2, 2)};
  CHECK_THROWS_AS(hemicurvature_closed_form(canonicalize(rep), 0), PreconditionError);
}

TEST_CASE("mu_roots_oracle examples") {
  const auto r1 = mu_roots_oracle(canonicalize({m11(2.0), m11(-1.0), m11(1.0)}));
  REQUIRE(r1.size() == 1);
  CHECK(std::abs(r1(0) - Complex(3.0, 0.0)) < 1e-12);
  CHECK(mu_roots_oracle(canonicalize(blocks_of("bilinear"))).size() == 0);
  const auto r2 = mu_roots_oracle(canonicalize(example_res_minus5()));
  REQUIRE(r2.size() == 1);
  CHECK(std::abs(r2(0) - Complex(-5.0, 0.0)) < 1e-10);
}

namespace {

// Random blocks with rank(B) = r and generic C, so H is invertible.
HessianBlocks random_instance(std::mt19937_64& rng, Index d1, Index d2, Index r) {
  std::normal_distribution<double> g;
  Mat A(d1, d1), C(d1, d2), Q(d2, d2);
  for (Index i = 0; i < A.size(); ++i) A(i) = g(rng);
  for (Index i = 0; i < C.size(); ++i) C(i) = g(rng);
  for (Index i = 0; i < Q.size(); ++i) Q(i) = g(rng);
  A = (A + A.transpose()).eval() / 2;
  const Mat P = Eigen::HouseholderQR<Mat>(Q).householderQ();
  Vec b = Vec::Zero(d2);
  for (Index i = 0; i < r; ++i) b(i) = (g(rng) > 0 ? 1.0 : -1.0) * (0.5 + std::abs(g(rng)));
  const Mat B = P * b.asDiagonal() * P.transpose();
  return {A, 0.5 * (B + B.transpose()), C};
}

}  // namespace

TEST_CASE("random instances: counts, asymptotic values, oracle agreement") {
  std::mt19937_64 rng(2024);
  const std::array<std::array<Index, 3>, 4> shapes{{{2, 1, 0}, {2, 2, 1}, {3, 2, 1}, {3, 3, 2}}};
  int tested = 0;
  for (const auto& s : shapes) {
    for (int trial = 0; trial < 50; ++trial) {
      const HessianBlocks hb = random_instance(rng, s[0], s[1], s[2]);
      const Mat H = hb.jacobian();
      if (!is_invertible(H)) continue;
      const auto cb = canonicalize(hb);
      REQUIRE(cb.r == s[2]);
      const auto rs = restricted_schur(cb);

      const CVec mu = mu_roots_oracle(cb);
      CHECK(multiset_distance(mu, rs.eigenvalues().cast<Complex>()) < 1e-8);

      const auto curves = eigencurves(H, s[0], default_eps_grid());
      CHECK(curves.label_counts() == curves.expected_counts());
      const Index m = static_cast<Index>(curves.eps_grid.size());
      const double eps = curves.eps_grid.back();
      for (Index j = 0; j < curves.size(); ++j) {
        CHECK(curves.lambda.col(j).cwiseAbs().minCoeff() > 0.0);
        const Complex l = curves.lambda(m - 1, j);
        if (curves.type[j] == CurveType::LinearEps) {
          double best = 1e300;
          for (Index i = 0; i < rs.w(); ++i) best = std::min(best, std::abs(l / eps - rs.eigenvalues()(i)));
          CHECK(best < 1e-4 * std::max(1.0, rs.S_res.norm()));
        } else if (curves.type[j] == CurveType::OrderOne) {
          double best = 1e300;
          for (Index i = 0; i < cb.r; ++i) best = std::min(best, std::abs(l - cb.D()(i)));
          CHECK(best < 1e-4);
        }
      }

      const Vec ev = rs.eigenvalues();
      const double tol = default_psd_tol(rs.S_res);
      if (ev.size() == 0 || std::abs(ev(0)) >= 10 * tol) {
        CHECK(rsc_subspace_oracle(cb, 200, 17 + trial) == second_order_necessary(cb).Sres_psd);
      }

      // Hemicurvature consistency with the closed form when σ are distinct.
      try {
        for (Index k = 0; k < curves.sigma.size(); ++k) {
          const double closed = hemicurvature_closed_form(cb, k, 1e-3);
          for (Index j = 0; j < curves.size(); ++j) {
            if (curves.sigma_index[j] == k) {
              CHECK(std::abs(curves.hemicurvature[j] - closed) <= std::max(1e-3, 1e-2 * std::abs(closed)));
            }
          }
        }
      } catch (const PreconditionError&) {
      }
      ++tested;
    }
  }
  CHECK(tested >= 190);
}

TEST_CASE("hemicurvature is minus half the limiting curvature") {
  for (auto [a, c] : {std::pair{2.0, 1.0}, {-2.0, 1.0}, {4.0, 3.0}}) {
    const Mat H = blocks_of("scalar_degenerate", {{"a", a}, {"c", c}}).jacobian();
    // Three points of the upper curve at small ε; signed curvature of the
    // circle through them, traversed in the direction of increasing ε.
    const std::vector<double> grid = geometric_grid(1e-6, 1e-7, 3);
    const auto curves = eigencurves(H, 1, grid, {kDefaultRankTol, 0.15, false});
    const Complex p0 = curves.lambda(2, 0), p1 = curves.lambda(1, 0), p2 = curves.lambda(0, 0);
    const Complex u = p1 - p0, v = p2 - p1, w = p2 - p0;
    const double cross = (std::conj(u) * v).imag();
    const double kappa = 2.0 * cross / (std::abs(u) * std::abs(v) * std::abs(w));
    const double iota = a / (2 * c * c);
    CHECK(std::abs(-0.5 * kappa - iota) < 5e-2 * std::max(1.0, std::abs(iota)));
  }
}
