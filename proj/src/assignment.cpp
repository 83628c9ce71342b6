#include "minimax/assignment.hpp"

#include <limits>

#include "minimax/errors.hpp"

namespace minimax {

std::vector<Index> solve_assignment(const Mat& cost) {
  const Index n = cost.rows();
  if (cost.cols() != n) throw ValidationError("solve_assignment: cost matrix must be square");
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();

  // 1-based potentials; p[j] = row matched to column j, p[0] is the row being inserted.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> p(n + 1, 0), way(n + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> col(n, -1);
  for (Index j = 1; j <= n; ++j) {
    if (p[j] != 0) col[p[j] - 1] = j - 1;
  }
  return col;
}

std::vector<Index> match_eigenvalues(const CVec& prev, const CVec& next) {
  if (prev.size() != next.size()) {
    throw ValidationError("match_eigenvalues: size mismatch");
  }
  const Index n = prev.size();
  Mat cost(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) cost(i, j) = std::abs(prev(i) - next(j));
  }
  return solve_assignment(cost);
}

double multiset_distance(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  const auto perm = match_eigenvalues(a, b);
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a(i) - b(perm[i])));
  return worst;
}

}  // namespace minimax
