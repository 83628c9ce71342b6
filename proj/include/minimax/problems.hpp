#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "minimax/types.hpp"

namespace minimax {

// Second-derivative blocks of f at a point: A = ∇²ₓₓf, B = ∇²ᵧᵧf, C = ∇²ₓᵧf.
struct HessianBlocks {
  Mat A;
  Mat B;
  Mat C;

  Index d1() const { return A.rows(); }
  Index d2() const { return B.rows(); }

  // H = DF = [[A, C], [-Cᵀ, -B]].
  Mat jacobian() const;

  // Splits a (d1+d2)-square Jacobian of F back into blocks (A, B, C).
  static HessianBlocks from_jacobian(const Mat& H, Index d1);
};

// f(x, y) = ½xᵀAx + xᵀCy + ½yᵀBy.
struct QuadraticSpec {
  Mat A;
  Mat B;
  Mat C;

  bool operator==(const QuadraticSpec& other) const {
    return A == other.A && B == other.B && C == other.C;
  }
};

// Absolute asymmetry allowed in A and B before construction is rejected.
inline constexpr double kSymmetryTolerance = 1e-8;

// Returns (M + Mᵀ)/2, throwing ValidationError if ‖M - Mᵀ‖_max exceeds tol.
Mat symmetrized(const Mat& M, double tol, const std::string& what);

// Checks shapes and symmetry; returns the spec with symmetrized A and B.
QuadraticSpec validated(QuadraticSpec spec);

// Evaluator bundle for a smooth minimax objective min_x max_y f(x, y).
// Immutable after construction; evaluators must be pure.
class MinimaxProblem {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  // Returns (∇ₓf, ∇ᵧf) stacked into one vector of length d1+d2.
  using GradFn = std::function<Vec(const Vec&)>;
  using BlocksFn = std::function<HessianBlocks(const Vec&)>;

  MinimaxProblem(std::string name, Index d1, Index d2, ValueFn value, GradFn grad,
                 std::optional<BlocksFn> blocks, double lipschitz_bound);

  static MinimaxProblem quadratic(QuadraticSpec spec, std::string name = "quadratic");

  const std::string& name() const { return name_; }
  Index d1() const { return d1_; }
  Index d2() const { return d2_; }
  Index dim() const { return d1_ + d2_; }
  double lipschitz_bound() const { return lipschitz_; }
  bool has_analytic_blocks() const { return blocks_.has_value(); }
  const std::optional<QuadraticSpec>& quadratic_spec() const { return quadratic_; }
  // Named builtin parameters (e.g. a, c for scalar_degenerate); empty otherwise.
  const std::map<std::string, double>& parameters() const { return parameters_; }

  double value(const Vec& z) const;
  Vec gradient(const Vec& z) const;
  // Analytic blocks, symmetrized; nullopt if no analytic evaluator was given.
  std::optional<HessianBlocks> analytic_blocks(const Vec& z) const;

  MinimaxProblem with_parameters(std::map<std::string, double> params) const;

 private:
  void check_point(const Vec& z) const;

  std::string name_;
  Index d1_;
  Index d2_;
  ValueFn value_;
  GradFn grad_;
  std::optional<BlocksFn> blocks_;
  double lipschitz_;
  std::optional<QuadraticSpec> quadratic_;
  std::map<std::string, double> parameters_;
};

// F(z) = (∇ₓf(z), -∇ᵧf(z)).
Vec saddle_gradient(const MinimaxProblem& problem, const Vec& z);

// Central-difference step used when no analytic blocks exist.
double fd_step(const Vec& z);

// Central finite differences of F, column by column.
Mat finite_difference_jacobian(const MinimaxProblem& problem, const Vec& z);

// H(z) = DF(z); analytic when available, finite differences otherwise.
Mat jacobian_F(const MinimaxProblem& problem, const Vec& z);

// Blocks (A, B, C) at z, read off jacobian_F and symmetrized.
HessianBlocks hessian_blocks(const MinimaxProblem& problem, const Vec& z);

// ‖[[A, C], [-Cᵀ, -B]]‖₂.
double spectral_norm(const Mat& M);

// Builtin instances:
//   bilinear                         f = xy
//   scalar_degenerate      (a, c)    A=[a], B=[0], C=[c]
//   nondegenerate_quadratic          A=[2], B=[-1], C=[1] unless given explicitly
//   strict_nonminimax_demo           quartic in x₁ with a strict non-minimax origin
MinimaxProblem builtin_problem(const std::string& name,
                               const std::map<std::string, double>& params = {});

MinimaxProblem scalar_degenerate(double a, double c);
MinimaxProblem strict_nonminimax_demo();

}  // namespace minimax
