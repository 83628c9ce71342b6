#include "minimax/problems.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "minimax/errors.hpp"

namespace minimax {

Mat HessianBlocks::jacobian() const {
  const Index n1 = d1();
  const Index n2 = d2();
  Mat H(n1 + n2, n1 + n2);
  H.topLeftCorner(n1, n1) = A;
  H.topRightCorner(n1, n2) = C;
  H.bottomLeftCorner(n2, n1) = -C.transpose();
  H.bottomRightCorner(n2, n2) = -B;
  return H;
}

HessianBlocks HessianBlocks::from_jacobian(const Mat& H, Index d1) {
  if (H.rows() != H.cols() || d1 <= 0 || d1 >= H.rows()) {
    throw ValidationError("from_jacobian: H must be square with 0 < d1 < dim");
  }
  const Index d2 = H.rows() - d1;
  HessianBlocks b;
  b.A = H.topLeftCorner(d1, d1);
  b.C = H.topRightCorner(d1, d2);
  b.B = -H.bottomRightCorner(d2, d2);
  return b;
}

Mat symmetrized(const Mat& M, double tol, const std::string& what) {
  if (M.rows() != M.cols()) {
    throw ValidationError(what + " must be square");
  }
  if (M.size() > 0) {
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol) {
      throw ValidationError(what + " is not symmetric (asymmetry " + std::to_string(asym) + ")");
    }
  }
  return 0.5 * (M + M.transpose());
}

QuadraticSpec validated(QuadraticSpec spec) {
  const Index d1 = spec.A.rows();
  const Index d2 = spec.B.rows();
  if (d1 <= 0 || d2 <= 0) {
    throw ValidationError("quadratic: A and B must be non-empty");
  }
  if (spec.C.rows() != d1 || spec.C.cols() != d2) {
    throw ValidationError("quadratic: C must be d1 x d2");
  }
  if (!spec.A.allFinite() || !spec.B.allFinite() || !spec.C.allFinite()) {
    throw ValidationError("quadratic: matrices must be finite");
  }
  spec.A = symmetrized(spec.A, kSymmetryTolerance, "A");
  spec.B = symmetrized(spec.B, kSymmetryTolerance, "B");
  return spec;
}

double spectral_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(0);
}

MinimaxProblem::MinimaxProblem(std::string name, Index d1, Index d2, ValueFn value, GradFn grad,
                               std::optional<BlocksFn> blocks, double lipschitz_bound)
    : name_(std::move(name)),
      d1_(d1),
      d2_(d2),
      value_(std::move(value)),
      grad_(std::move(grad)),
      blocks_(std::move(blocks)),
      lipschitz_(lipschitz_bound) {
  if (d1_ <= 0 || d2_ <= 0) {
    throw ValidationError("problem dimensions must be positive");
  }
  if (!(lipschitz_ > 0.0) || !std::isfinite(lipschitz_)) {
    throw ValidationError("lipschitz_bound must be a positive finite number");
  }
  if (!grad_) {
    throw ValidationError("gradient evaluator is required");
  }
}

MinimaxProblem MinimaxProblem::quadratic(QuadraticSpec spec, std::string name) {
  spec = validated(std::move(spec));
  const Index d1 = spec.A.rows();
  const Index d2 = spec.B.rows();
  HessianBlocks blocks{spec.A, spec.B, spec.C};
  const double L = spectral_norm(blocks.jacobian());

  auto value = [spec, d1, d2](const Vec& z) {
    const auto x = z.head(d1);
    const auto y = z.tail(d2);
    return 0.5 * x.dot(spec.A * x) + x.dot(spec.C * y) + 0.5 * y.dot(spec.B * y);
  };
  auto grad = [spec, d1, d2](const Vec& z) {
    const auto x = z.head(d1);
    const auto y = z.tail(d2);
    Vec g(d1 + d2);
    g.head(d1) = spec.A * x + spec.C * y;
    g.tail(d2) = spec.C.transpose() * x + spec.B * y;
    return g;
  };
  auto hess = [blocks](const Vec&) { return blocks; };

  // A zero H (e.g. f ≡ 0) has no meaningful bound; keep L positive.
  MinimaxProblem p(std::move(name), d1, d2, value, grad, BlocksFn(hess),
                   L > 0.0 ? L : std::numeric_limits<double>::min());
  p.quadratic_ = spec;
  return p;
}

MinimaxProblem MinimaxProblem::with_parameters(std::map<std::string, double> params) const {
  MinimaxProblem copy = *this;
  copy.parameters_ = std::move(params);
  return copy;
}

void MinimaxProblem::check_point(const Vec& z) const {
  if (z.size() != dim()) {
    throw ValidationError("point has length " + std::to_string(z.size()) + ", expected " +
                          std::to_string(dim()));
  }
}

double MinimaxProblem::value(const Vec& z) const {
  check_point(z);
  if (!value_) throw EvaluationError("problem '" + name_ + "' has no value evaluator");
  try {
    return value_(z);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError(std::string("value evaluator failed: ") + e.what());
  }
}

Vec MinimaxProblem::gradient(const Vec& z) const {
  check_point(z);
  Vec g;
  try {
    g = grad_(z);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError(std::string("gradient evaluator failed: ") + e.what());
  }
  if (g.size() != dim()) {
    throw EvaluationError("gradient evaluator returned wrong length");
  }
  return g;
}

std::optional<HessianBlocks> MinimaxProblem::analytic_blocks(const Vec& z) const {
  check_point(z);
  if (!blocks_) return std::nullopt;
  HessianBlocks b;
  try {
    b = (*blocks_)(z);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw EvaluationError(std::string("hessian evaluator failed: ") + e.what());
  }
  if (b.A.rows() != d1_ || b.B.rows() != d2_ || b.C.rows() != d1_ || b.C.cols() != d2_) {
    throw EvaluationError("hessian evaluator returned blocks of the wrong shape");
  }
  b.A = symmetrized(b.A, kSymmetryTolerance, "A");
  b.B = symmetrized(b.B, kSymmetryTolerance, "B");
  return b;
}

Vec saddle_gradient(const MinimaxProblem& problem, const Vec& z) {
  Vec F = problem.gradient(z);
  F.tail(problem.d2()) *= -1.0;
  return F;
}

double fd_step(const Vec& z) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, z.norm());
}

Mat finite_difference_jacobian(const MinimaxProblem& problem, const Vec& z) {
  const Index n = problem.dim();
  const double h = fd_step(z);
  Mat J(n, n);
  Vec zp = z;
  for (Index k = 0; k < n; ++k) {
    zp(k) = z(k) + h;
    const Vec fp = saddle_gradient(problem, zp);
    zp(k) = z(k) - h;
    const Vec fm = saddle_gradient(problem, zp);
    zp(k) = z(k);
    J.col(k) = (fp - fm) / (2.0 * h);
  }
  return J;
}

Mat jacobian_F(const MinimaxProblem& problem, const Vec& z) {
  if (auto blocks = problem.analytic_blocks(z)) {
    return blocks->jacobian();
  }
  return finite_difference_jacobian(problem, z);
}

HessianBlocks hessian_blocks(const MinimaxProblem& problem, const Vec& z) {
  if (auto blocks = problem.analytic_blocks(z)) {
    return *blocks;
  }
  HessianBlocks b = HessianBlocks::from_jacobian(finite_difference_jacobian(problem, z), problem.d1());
  // Finite differences leave O(h²) asymmetry; symmetrize without the strict check.
  b.A = 0.5 * (b.A + b.A.transpose());
  b.B = 0.5 * (b.B + b.B.transpose());
  return b;
}

MinimaxProblem scalar_degenerate(double a, double c) {
  QuadraticSpec spec{Mat::Constant(1, 1, a), Mat::Zero(1, 1), Mat::Constant(1, 1, c)};
  return MinimaxProblem::quadratic(spec, "scalar_degenerate").with_parameters({{"a", a}, {"c", c}});
}

// f(x, y) = ¼x₁⁴ - ½x₁² + ½x₂² + x₂y₂ - ½y₁².
// Stationary points: x₁ ∈ {0, ±1}, everything else zero. At the origin
// S_res = [-1]; at x₁ = ±1 the point is a (degenerate) local minimax point.
// L = 2 holds on the slab |x₁| ≤ 1, which the τ-EG iterates do not leave.
MinimaxProblem strict_nonminimax_demo() {
  auto value = [](const Vec& z) {
    const double x1 = z(0), x2 = z(1), y1 = z(2), y2 = z(3);
    return 0.25 * std::pow(x1, 4) - 0.5 * x1 * x1 + 0.5 * x2 * x2 + x2 * y2 - 0.5 * y1 * y1;
  };
  auto grad = [](const Vec& z) {
    const double x1 = z(0), x2 = z(1), y1 = z(2), y2 = z(3);
    Vec g(4);
    g << x1 * x1 * x1 - x1, x2 + y2, -y1, x2;
    return g;
  };
  auto blocks = [](const Vec& z) {
    HessianBlocks b;
    b.A = Mat::Zero(2, 2);
    b.A(0, 0) = 3.0 * z(0) * z(0) - 1.0;
    b.A(1, 1) = 1.0;
    b.B = Mat::Zero(2, 2);
    b.B(0, 0) = -1.0;
    b.C = Mat::Zero(2, 2);
    b.C(1, 1) = 1.0;
    return b;
  };
  return MinimaxProblem("strict_nonminimax_demo", 2, 2, value, grad,
                        MinimaxProblem::BlocksFn(blocks), 2.0);
}

MinimaxProblem builtin_problem(const std::string& name, const std::map<std::string, double>& params) {
  auto param = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "bilinear") {
    QuadraticSpec spec{Mat::Zero(1, 1), Mat::Zero(1, 1), Mat::Ones(1, 1)};
    return MinimaxProblem::quadratic(spec, "bilinear");
  }
  if (name == "scalar_degenerate") {
    return scalar_degenerate(param("a", 2.0), param("c", 1.0));
  }
  if (name == "nondegenerate_quadratic") {
    QuadraticSpec spec{Mat::Constant(1, 1, param("a", 2.0)), Mat::Constant(1, 1, param("b", -1.0)),
                       Mat::Constant(1, 1, param("c", 1.0))};
    if (spec.B(0, 0) == 0.0) {
      throw ValidationError("nondegenerate_quadratic requires b != 0");
    }
    return MinimaxProblem::quadratic(spec, "nondegenerate_quadratic")
        .with_parameters({{"a", spec.A(0, 0)}, {"b", spec.B(0, 0)}, {"c", spec.C(0, 0)}});
  }
  if (name == "strict_nonminimax_demo") {
    return strict_nonminimax_demo();
  }
  throw UnknownProblemError("unknown builtin problem '" + name + "'");
}

}  // namespace minimax
