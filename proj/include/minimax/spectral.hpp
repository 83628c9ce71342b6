#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minimax/problems.hpp"

namespace minimax {

// Blocks rewritten in the eigenbasis of B:
//   B = P·diag(b)·Pᵀ with the r nonzero eigenvalues first (descending |b|),
//   D = -b[0:r], C·P = [C₁ C₂] with C₁: d1×r and C₂: d1×(d2-r).
struct CanonicalBlocks {
  Mat A;
  Vec b;        // diagonal of the canonical B, length d2
  Mat P;        // orthogonal d2×d2
  Mat C_canon;  // C·P
  Index r = 0;
  double rank_threshold = 0.0;  // absolute cut used for rank(B)

  // Inputs in original coordinates.
  Mat B;
  Mat C;

  Index d1() const { return A.rows(); }
  Index d2() const { return b.size(); }
  Mat B_diag() const { return b.asDiagonal(); }
  Vec D() const { return -b.head(r); }
  Mat C1() const { return C_canon.leftCols(r); }
  Mat C2() const { return C_canon.rightCols(d2() - r); }
  HessianBlocks original() const { return {A, B, C}; }
};

inline constexpr double kDefaultRankTol = 1e-9;

// rank_tol is relative to ‖B‖₂.
CanonicalBlocks canonicalize(const HessianBlocks& blocks, double rank_tol = kDefaultRankTol);

// S = A - CB†Cᵀ, U an orthonormal basis of range(Γ)^⊥ with Γ = C₂,
// S_res = UᵀSU (0×0 when range(Γ) is all of ℝ^{d1}).
struct RestrictedSchur {
  Mat U;
  Mat S;
  Mat S_res;

  Index w() const { return S_res.rows(); }
  bool vacuous() const { return S_res.rows() == 0; }
  Vec eigenvalues() const;  // ascending; empty when vacuous
};

RestrictedSchur restricted_schur(const CanonicalBlocks& blocks);

// max(1e-8·‖M‖₂, 1e-10).
double default_psd_tol(const Mat& M);

// Independent check of S_res ⪰ 0: samples v with Cᵀv ∈ range(B) (computed in
// the original coordinates), then refines the most negative sample with a
// projected power iteration. Returns whether min vᵀSv/vᵀv ≥ -psd_tol.
bool rsc_subspace_oracle(const CanonicalBlocks& blocks, int n_samples, std::uint64_t seed,
                         std::optional<double> psd_tol = std::nullopt);

struct SecondOrderVerdict {
  bool B_nsd = false;
  bool Sres_psd = false;
  // Set when the deciding eigenvalue lies within the tolerance band.
  bool B_marginal = false;
  bool Sres_marginal = false;
  double lambda_max_B = 0.0;
  double lambda_min_Sres = 0.0;  // +inf when S_res is 0×0
};

SecondOrderVerdict second_order_necessary(const CanonicalBlocks& blocks,
                                          std::optional<double> psd_tol = std::nullopt);

// λ_min(S_res) < -tol or λ_min(-B) < -tol.
bool is_strict_non_minimax(const CanonicalBlocks& blocks, std::optional<double> tol = std::nullopt);

// H_τ = Λ_τH: top d1 rows scaled by 1/τ.
Mat timescaled_hessian(const Mat& H, Index d1, double tau);

// Λ_τ^{1/2}·H·Λ_τ^{1/2}, similar to H_τ and far better scaled for small 1/τ.
Mat balanced_timescaled_hessian(const Mat& H, Index d1, double tau);

// Eigenvalues of H_τ, computed from the balanced similar matrix.
CVec timescaled_spectrum(const Mat& H, Index d1, double tau);

enum class CurveType { SqrtEpsPair, LinearEps, OrderOne, Unlabeled };

std::string to_string(CurveType t);

struct EigenCurveOptions {
  double rank_tol = kDefaultRankTol;
  double slope_band = 0.15;
  // Throw ClassificationError when labels cannot be assigned consistently.
  bool require_labels = true;
};

struct EigenCurves {
  std::vector<double> eps_grid;  // strictly decreasing
  CMat lambda;                   // lambda(k, j): curve j at eps_grid[k]
  std::vector<CurveType> type;
  std::vector<double> slope;     // log|λ| vs log ε over the finest decade
  std::vector<Index> sigma_index;  // into sigma for sqrt_eps_pair curves, else -1
  Vec sigma;                       // singular values of C₂, descending
  std::vector<double> hemicurvature;  // NaN for curves outside I
  Index d1 = 0;
  Index d2 = 0;
  Index r = 0;
  double scale = 1.0;  // ‖H‖₂, sets the noise floor for Re(1/λ)
  bool labeled = false;

  Index size() const { return lambda.cols(); }
  // (2(d2-r), d1-d2+r, r).
  std::array<Index, 3> expected_counts() const;
  std::array<Index, 3> label_counts() const;
};

// Geometric grid of n points from hi down to lo.
std::vector<double> geometric_grid(double hi, double lo, int n);
// 40 points from 1e-1 down to 1e-9.
std::vector<double> default_eps_grid();

// Tracks the d1+d2 eigenvalues of H_τ (τ = 1/ε) across the grid, matching
// neighbours by optimal assignment, labels their asymptotic order and
// estimates hemicurvatures for the √ε curves.
EigenCurves eigencurves(const Mat& H, Index d1, const std::vector<double>& eps_grid,
                        const EigenCurveOptions& options = {});

// lim Re(1/λ_j(ε)) by Richardson extrapolation in √ε over the three finest
// grid points; ±infinity when |Re(1/λ_j)| grows at least like ε^{-1/4}.
double hemicurvature(const EigenCurves& curves, Index j);

// ι = ½·u_jᵀSu_j/σ_j² for the j-th singular triple of C₂ (descending σ).
// Requires distinct singular values (relative separation sep_tol).
double hemicurvature_closed_form(const CanonicalBlocks& blocks, Index j, double sep_tol = 1e-6);

// max_{j∈I}(-ι_j); +inf if some ι_j = -inf; -inf when I is empty.
double s_zero(const EigenCurves& curves);

// Finite roots μ of det[[μI - A, -C], [Cᵀ, B]] = 0, from the pencil
// (H, diag(I, 0)); there are d1 - d2 + r of them.
CVec mu_roots_oracle(const CanonicalBlocks& blocks);

// σ(H) smallest/largest ratio below which H counts as singular.
inline constexpr double kSingularRatio = 1e-12;
bool is_invertible(const Mat& H);

}  // namespace minimax
