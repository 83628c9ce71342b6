#include "minimax/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "minimax/assignment.hpp"
#include "minimax/errors.hpp"

namespace minimax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat sym(const Mat& M) { return 0.5 * (M + M.transpose()); }

double max_abs_eigenvalue(const Mat& S) {
  if (S.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Vec sym_eigenvalues(const Mat& S) {
  if (S.size() == 0) return Vec();
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

// Grid indices used for asymptotic fits: ε ≤ 10·ε_min, at least `min_points`.
std::vector<Index> finest_decade(const std::vector<double>& grid, size_t min_points) {
  std::vector<Index> idx;
  if (grid.empty()) return idx;
  const double eps_min = grid.back();
  for (size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] <= 10.0 * eps_min * (1.0 + 1e-12)) idx.push_back(static_cast<Index>(k));
  }
  while (idx.size() < min_points && static_cast<size_t>(idx.size()) < grid.size()) {
    idx.insert(idx.begin(), idx.front() - 1);
  }
  return idx;
}

int type_rank(CurveType t) {
  switch (t) {
    case CurveType::SqrtEpsPair: return 0;
    case CurveType::LinearEps: return 1;
    case CurveType::OrderOne: return 2;
    case CurveType::Unlabeled: return 3;
  }
  return 3;
}

}  // namespace

CanonicalBlocks canonicalize(const HessianBlocks& blocks, double rank_tol) {
  const Index d2 = blocks.d2();
  CanonicalBlocks cb;
  cb.A = blocks.A;
  cb.B = blocks.B;
  cb.C = blocks.C;

  Eigen::SelfAdjointEigenSolver<Mat> es(sym(blocks.B));
  const Vec vals = es.eigenvalues();
  const Mat vecs = es.eigenvectors();
  const double bnorm = d2 > 0 ? vals.cwiseAbs().maxCoeff() : 0.0;
  cb.rank_threshold = rank_tol * bnorm;

  std::vector<Index> order(d2);
  std::iota(order.begin(), order.end(), 0);
  auto nonzero = [&](Index i) { return std::abs(vals(i)) > cb.rank_threshold; };
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    const bool ni = nonzero(i), nj = nonzero(j);
    if (ni != nj) return ni;
    return ni && std::abs(vals(i)) > std::abs(vals(j));
  });

  cb.b = Vec::Zero(d2);
  cb.P = Mat(d2, d2);
  cb.r = 0;
  for (Index k = 0; k < d2; ++k) {
    const Index i = order[k];
    cb.P.col(k) = vecs.col(i);
    if (nonzero(i)) {
      cb.b(k) = vals(i);
      ++cb.r;
    }
  }
  cb.C_canon = blocks.C * cb.P;
  return cb;
}

Vec RestrictedSchur::eigenvalues() const { return sym_eigenvalues(S_res); }

RestrictedSchur restricted_schur(const CanonicalBlocks& blocks) {
  const Index d1 = blocks.d1();
  RestrictedSchur rs;

  // S = A - CB†Cᵀ = A - C₁ diag(b₁..b_r)⁻¹ C₁ᵀ.
  const Mat C1 = blocks.C1();
  const Vec inv_b = blocks.b.head(blocks.r).cwiseInverse();
  rs.S = sym(blocks.A - C1 * inv_b.asDiagonal() * C1.transpose());

  const Mat gamma = blocks.C2();
  if (gamma.cols() == 0) {
    rs.U = Mat::Identity(d1, d1);
  } else {
    Eigen::JacobiSVD<Mat> svd(gamma, Eigen::ComputeFullU);
    const Vec sv = svd.singularValues();
    const double cut = 1e-10 * std::max(sv.size() > 0 ? sv(0) : 0.0, 1e-300);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > cut) ++rank;
    }
    rs.U = svd.matrixU().rightCols(d1 - rank);
  }
  rs.S_res = sym(rs.U.transpose() * rs.S * rs.U);
  return rs;
}

double default_psd_tol(const Mat& M) { return std::max(1e-8 * max_abs_eigenvalue(M), 1e-10); }

bool rsc_subspace_oracle(const CanonicalBlocks& blocks, int n_samples, std::uint64_t seed,
                         std::optional<double> psd_tol) {
  const Index d1 = blocks.d1();
  const Mat& B = blocks.B;
  const Mat& C = blocks.C;

  // ker(B) and B† from an SVD of B in the original coordinates.
  Eigen::JacobiSVD<Mat> bsvd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec bs = bsvd.singularValues();
  const double bcut = blocks.rank_threshold;
  Index brank = 0;
  for (Index i = 0; i < bs.size(); ++i) {
    if (bs(i) > bcut) ++brank;
  }
  const Mat K = bsvd.matrixV().rightCols(B.cols() - brank);
  Vec inv_s = Vec::Zero(bs.size());
  for (Index i = 0; i < brank; ++i) inv_s(i) = 1.0 / bs(i);
  const Mat B_pinv = bsvd.matrixV() * inv_s.asDiagonal() * bsvd.matrixU().transpose();
  const Mat S = sym(blocks.A - C * B_pinv * C.transpose());

  // Projector onto {v : Kᵀ Cᵀ v = 0}.
  const Mat G = C * K;
  Mat Pi = Mat::Identity(d1, d1);
  Index grank = 0;
  if (G.cols() > 0) {
    Eigen::JacobiSVD<Mat> gsvd(G, Eigen::ComputeFullU);
    const Vec gs = gsvd.singularValues();
    const double gcut = 1e-10 * std::max(gs.size() > 0 ? gs(0) : 0.0, 1e-300);
    for (Index i = 0; i < gs.size(); ++i) {
      if (gs(i) > gcut) ++grank;
    }
    const Mat Ug = gsvd.matrixU().leftCols(grank);
    Pi -= Ug * Ug.transpose();
  }
  if (grank == d1) return true;  // only v = 0 qualifies

  const Mat PSP = sym(Pi * S * Pi);
  const double tol = psd_tol.value_or(default_psd_tol(PSP));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto rayleigh = [&](const Vec& v) { return v.dot(S * v) / v.squaredNorm(); };

  double best = kInf;
  Vec best_v;
  for (int i = 0; i < std::max(n_samples, 1); ++i) {
    Vec g(d1);
    for (Index k = 0; k < d1; ++k) g(k) = normal(rng);
    Vec v = Pi * g;
    if (v.norm() < 1e-12 * g.norm()) continue;
    v.normalize();
    const double q = rayleigh(v);
    if (q < best) {
      best = q;
      best_v = v;
    }
  }
  if (best_v.size() == 0) return true;

  // Power iteration on Π(cI - S)Π drives v toward the smallest restricted eigenvector.
  const double c = PSP.norm() + 1.0;
  const Mat shifted = Pi * (c * Mat::Identity(d1, d1) - S) * Pi;
  Vec v = best_v;
  for (int it = 0; it < 2000; ++it) {
    Vec next = shifted * v;
    const double n = next.norm();
    if (!(n > 0.0)) break;
    v = next / n;
  }
  v = Pi * v;
  if (v.norm() > 0.0) best = std::min(best, rayleigh(v));
  return best >= -tol;
}

SecondOrderVerdict second_order_necessary(const CanonicalBlocks& blocks,
                                          std::optional<double> psd_tol) {
  SecondOrderVerdict v;
  const double tol_b = psd_tol.value_or(default_psd_tol(blocks.B));
  v.lambda_max_B = blocks.b.size() > 0 ? blocks.b.maxCoeff() : -kInf;
  v.B_nsd = v.lambda_max_B <= tol_b;
  v.B_marginal = v.lambda_max_B > 0.0 && v.lambda_max_B <= tol_b;

  const RestrictedSchur rs = restricted_schur(blocks);
  if (rs.vacuous()) {
    v.lambda_min_Sres = kInf;
    v.Sres_psd = true;
    return v;
  }
  const double tol_s = psd_tol.value_or(default_psd_tol(rs.S_res));
  v.lambda_min_Sres = rs.eigenvalues()(0);
  v.Sres_psd = v.lambda_min_Sres >= -tol_s;
  v.Sres_marginal = v.lambda_min_Sres < 0.0 && v.lambda_min_Sres >= -tol_s;
  return v;
}

bool is_strict_non_minimax(const CanonicalBlocks& blocks, std::optional<double> tol) {
  const double tol_b = tol.value_or(default_psd_tol(blocks.B));
  if (blocks.b.size() > 0 && -blocks.b.maxCoeff() < -tol_b) return true;
  const RestrictedSchur rs = restricted_schur(blocks);
  if (rs.vacuous()) return false;
  const double tol_s = tol.value_or(default_psd_tol(rs.S_res));
  return rs.eigenvalues()(0) < -tol_s;
}

Mat timescaled_hessian(const Mat& H, Index d1, double tau) {
  Mat Ht = H;
  Ht.topRows(d1) /= tau;
  return Ht;
}

Mat balanced_timescaled_hessian(const Mat& H, Index d1, double tau) {
  const double eps = 1.0 / tau;
  const double root = std::sqrt(eps);
  const Index d2 = H.rows() - d1;
  Mat M = H;
  M.topLeftCorner(d1, d1) *= eps;
  M.topRightCorner(d1, d2) *= root;
  M.bottomLeftCorner(d2, d1) *= root;
  return M;
}

CVec timescaled_spectrum(const Mat& H, Index d1, double tau) {
  Eigen::EigenSolver<Mat> es(balanced_timescaled_hessian(H, d1, tau), false);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("eigensolver failed for H_tau at tau = " + std::to_string(tau));
  }
  return es.eigenvalues();
}

bool is_invertible(const Mat& H) {
  if (H.size() == 0) return false;
  Eigen::JacobiSVD<Mat> svd(H);
  const Vec s = svd.singularValues();
  return s(0) > 0.0 && s(s.size() - 1) / s(0) >= kSingularRatio;
}

std::string to_string(CurveType t) {
  switch (t) {
    case CurveType::SqrtEpsPair: return "sqrt_eps_pair";
    case CurveType::LinearEps: return "linear_eps";
    case CurveType::OrderOne: return "order_one";
    case CurveType::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

std::array<Index, 3> EigenCurves::expected_counts() const {
  return {2 * (d2 - r), d1 - d2 + r, r};
}

std::array<Index, 3> EigenCurves::label_counts() const {
  std::array<Index, 3> c{0, 0, 0};
  for (CurveType t : type) {
    if (t != CurveType::Unlabeled) ++c[type_rank(t)];
  }
  return c;
}

std::vector<double> geometric_grid(double hi, double lo, int n) {
  std::vector<double> g;
  if (n <= 0) return g;
  if (n == 1) return {hi};
  const double lhi = std::log(hi), llo = std::log(lo);
  for (int k = 0; k < n; ++k) {
    g.push_back(std::exp(lhi + (llo - lhi) * k / (n - 1)));
  }
  g.front() = hi;
  g.back() = lo;
  return g;
}

std::vector<double> default_eps_grid() { return geometric_grid(1e-1, 1e-9, 40); }

EigenCurves eigencurves(const Mat& H, Index d1, const std::vector<double>& eps_grid,
                        const EigenCurveOptions& options) {
  if (H.rows() != H.cols() || d1 <= 0 || d1 >= H.rows()) {
    throw ValidationError("eigencurves: H must be square with 0 < d1 < dim");
  }
  for (size_t k = 0; k < eps_grid.size(); ++k) {
    const double e = eps_grid[k];
    if (!(e > 0.0 && e <= 1.0) || (k > 0 && !(e < eps_grid[k - 1]))) {
      throw ValidationError("eigencurves: eps grid must be strictly decreasing in (0, 1]");
    }
  }
  if (!is_invertible(H)) {
    throw SingularHessianError("eigencurves: H = DF is singular");
  }

  HessianBlocks hb = HessianBlocks::from_jacobian(H, d1);
  hb.A = sym(hb.A);
  hb.B = sym(hb.B);
  const CanonicalBlocks cb = canonicalize(hb, options.rank_tol);

  const Index n = H.rows();
  EigenCurves curves;
  curves.eps_grid = eps_grid;
  curves.d1 = d1;
  curves.d2 = n - d1;
  curves.r = cb.r;
  curves.scale = spectral_norm(H);
  {
    const Mat C2 = cb.C2();
    curves.sigma = C2.cols() > 0 ? Vec(Eigen::JacobiSVD<Mat>(C2).singularValues()) : Vec();
  }

  const Index m = static_cast<Index>(eps_grid.size());
  curves.lambda = CMat(m, n);
  for (Index k = 0; k < m; ++k) {
    const CVec spec = timescaled_spectrum(H, d1, 1.0 / eps_grid[k]);
    if (k == 0) {
      curves.lambda.row(0) = spec.transpose();
      continue;
    }
    const CVec prev = curves.lambda.row(k - 1).transpose();
    const std::vector<Index> perm = match_eigenvalues(prev, spec);
    for (Index j = 0; j < n; ++j) curves.lambda(k, j) = spec(perm[j]);
  }

  curves.type.assign(n, CurveType::Unlabeled);
  curves.slope.assign(n, std::numeric_limits<double>::quiet_NaN());
  curves.sigma_index.assign(n, -1);
  curves.hemicurvature.assign(n, std::numeric_limits<double>::quiet_NaN());
  if (m < 2) {
    if (options.require_labels) {
      throw ClassificationError("eigencurves: at least two grid points are needed to label curves");
    }
    return curves;
  }

  const std::vector<Index> fit = finest_decade(eps_grid, 2);
  std::vector<double> lx;
  for (Index k : fit) lx.push_back(std::log(eps_grid[k]));
  const double targets[3] = {0.5, 1.0, 0.0};
  const CurveType kinds[3] = {CurveType::SqrtEpsPair, CurveType::LinearEps, CurveType::OrderOne};
  for (Index j = 0; j < n; ++j) {
    std::vector<double> ly;
    for (Index k : fit) ly.push_back(std::log(std::abs(curves.lambda(k, j))));
    const double s = fit_slope(lx, ly);
    curves.slope[j] = s;
    for (int t = 0; t < 3; ++t) {
      if (std::abs(s - targets[t]) <= options.slope_band) curves.type[j] = kinds[t];
    }
  }

  const auto expected = curves.expected_counts();
  const auto got = curves.label_counts();
  const bool all_labeled =
      std::none_of(curves.type.begin(), curves.type.end(),
                   [](CurveType t) { return t == CurveType::Unlabeled; });
  if (!all_labeled || got != expected) {
    if (options.require_labels) {
      std::string msg = "eigencurves: label counts (" + std::to_string(got[0]) + ", " +
                        std::to_string(got[1]) + ", " + std::to_string(got[2]) +
                        ") differ from expected (" + std::to_string(expected[0]) + ", " +
                        std::to_string(expected[1]) + ", " + std::to_string(expected[2]) +
                        "); slopes:";
      for (double s : curves.slope) msg += " " + std::to_string(s);
      throw ClassificationError(msg);
    }
    return curves;
  }
  curves.labeled = true;

  // Pair √ε curves with singular values of C₂, each σ taken twice (±i).
  std::vector<Index> sq;
  for (Index j = 0; j < n; ++j) {
    if (curves.type[j] == CurveType::SqrtEpsPair) sq.push_back(j);
  }
  if (!sq.empty()) {
    const Index ns = static_cast<Index>(sq.size());
    const double eps_min = eps_grid.back();
    Mat cost(ns, ns);
    for (Index a = 0; a < ns; ++a) {
      const double ratio = std::abs(curves.lambda(m - 1, sq[a])) / std::sqrt(eps_min);
      for (Index b = 0; b < ns; ++b) cost(a, b) = std::abs(ratio - curves.sigma(b / 2));
    }
    const std::vector<Index> col = solve_assignment(cost);
    for (Index a = 0; a < ns; ++a) curves.sigma_index[sq[a]] = col[a] / 2;
  }

  // Canonical column order: by type, then σ, then upper half-plane first.
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const int ta = type_rank(curves.type[a]), tb = type_rank(curves.type[b]);
    if (ta != tb) return ta < tb;
    if (curves.sigma_index[a] != curves.sigma_index[b]) {
      return curves.sigma_index[a] < curves.sigma_index[b];
    }
    return curves.lambda(m - 1, a).imag() > curves.lambda(m - 1, b).imag();
  });
  EigenCurves sorted = curves;
  for (Index j = 0; j < n; ++j) {
    sorted.lambda.col(j) = curves.lambda.col(order[j]);
    sorted.type[j] = curves.type[order[j]];
    sorted.slope[j] = curves.slope[order[j]];
    sorted.sigma_index[j] = curves.sigma_index[order[j]];
  }
  if (m >= 3) {
    for (Index j = 0; j < n; ++j) {
      if (sorted.type[j] == CurveType::SqrtEpsPair) sorted.hemicurvature[j] = hemicurvature(sorted, j);
    }
  }
  return sorted;
}

double hemicurvature(const EigenCurves& curves, Index j) {
  if (j < 0 || j >= curves.size()) {
    throw ValidationError("hemicurvature: curve index out of range");
  }
  if (curves.labeled && curves.type[j] != CurveType::SqrtEpsPair) {
    throw PreconditionError("hemicurvature: curve " + std::to_string(j) +
                            " is not of sqrt_eps_pair type");
  }
  const auto& grid = curves.eps_grid;
  const Index m = static_cast<Index>(grid.size());
  if (m < 3) {
    throw PreconditionError("hemicurvature: needs at least three grid points");
  }

  auto g = [&](Index k) { return (1.0 / curves.lambda(k, j)).real(); };
  // Rounding in λ of size ~u·‖H‖ shows up in Re(1/λ) as ~u·‖H‖/|λ|².
  auto floor = [&](Index k) {
    const double a = std::abs(curves.lambda(k, j));
    return 1e5 * std::numeric_limits<double>::epsilon() * curves.scale / (a * a);
  };

  const std::vector<Index> fit = finest_decade(grid, 3);
  bool significant = true;
  int sign = 0;
  std::vector<double> lx, ly;
  for (Index k : fit) {
    const double v = g(k);
    const int sv = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    if (sv == 0 || std::abs(v) <= floor(k) || (sign != 0 && sv != sign)) significant = false;
    sign = sv;
    lx.push_back(std::log(grid[k]));
    ly.push_back(std::log(std::abs(v)));
  }
  if (significant && fit_slope(lx, ly) < -0.2) {
    return sign * kInf;
  }

  // Quadratic through the three finest points in t = √ε, evaluated at t = 0.
  double t[3], y[3];
  for (int i = 0; i < 3; ++i) {
    t[i] = std::sqrt(grid[m - 3 + i]);
    y[i] = g(m - 3 + i);
  }
  double value = 0.0;
  for (int i = 0; i < 3; ++i) {
    double w = 1.0;
    for (int l = 0; l < 3; ++l) {
      if (l != i) w *= (0.0 - t[l]) / (t[i] - t[l]);
    }
    value += w * y[i];
  }
  return value;
}

double hemicurvature_closed_form(const CanonicalBlocks& blocks, Index j, double sep_tol) {
  const Mat C2 = blocks.C2();
  if (j < 0 || j >= C2.cols()) {
    throw ValidationError("hemicurvature_closed_form: index out of range");
  }
  Eigen::JacobiSVD<Mat> svd(C2, Eigen::ComputeFullU);
  const Vec s = svd.singularValues();
  if (!(s(j) > 0.0)) {
    throw PreconditionError("hemicurvature_closed_form: zero singular value (H singular)");
  }
  for (Index i = 0; i + 1 < s.size(); ++i) {
    if (s(i) - s(i + 1) <= sep_tol * s(0)) {
      throw PreconditionError("hemicurvature_closed_form: singular values of C2 are not distinct");
    }
  }
  const RestrictedSchur rs = restricted_schur(blocks);
  const Vec u = svd.matrixU().col(j);
  return 0.5 * u.dot(rs.S * u) / (s(j) * s(j));
}

double s_zero(const EigenCurves& curves) {
  double s0 = -kInf;
  for (Index j = 0; j < curves.size(); ++j) {
    if (curves.type[j] != CurveType::SqrtEpsPair) continue;
    const double iota = curves.hemicurvature[j];
    if (std::isnan(iota)) continue;
    s0 = std::max(s0, -iota);
  }
  return s0;
}

CVec mu_roots_oracle(const CanonicalBlocks& blocks) {
  const Index d1 = blocks.d1();
  const Index d2 = blocks.d2();
  const Index w = d1 - (d2 - blocks.r);
  if (w <= 0) return CVec();

  const Mat H = blocks.original().jacobian();
  Mat E = Mat::Zero(d1 + d2, d1 + d2);
  E.topLeftCorner(d1, d1).setIdentity();

  Eigen::GeneralizedEigenSolver<Mat> ges(H, E, false);
  if (ges.info() != Eigen::Success) {
    throw ConvergenceError("mu_roots_oracle: generalized eigensolver failed");
  }
  const CVec alpha = ges.alphas();
  const Vec beta = ges.betas();
  std::vector<std::pair<double, Complex>> roots;
  for (Index i = 0; i < alpha.size(); ++i) {
    const double mag = beta(i) == 0.0 ? kInf : std::abs(alpha(i)) / std::abs(beta(i));
    roots.push_back({mag, beta(i) == 0.0 ? Complex(kInf, 0.0) : alpha(i) / beta(i)});
  }
  std::sort(roots.begin(), roots.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  CVec out(w);
  for (Index i = 0; i < w; ++i) {
    if (!std::isfinite(roots[i].first)) {
      throw ConvergenceError("mu_roots_oracle: pencil has fewer finite roots than expected");
    }
    out(i) = roots[i].second;
  }
  return out;
}

}  // namespace minimax
