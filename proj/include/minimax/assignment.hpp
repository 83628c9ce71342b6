#pragma once

#include <vector>

#include "minimax/types.hpp"

namespace minimax {

// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres).
// Returns col[i] = column assigned to row i.
std::vector<Index> solve_assignment(const Mat& cost);

// Reorders `next` so that next[perm[i]] is matched to prev[i] with minimal
// total |prev[i] - next[perm[i]]|. Returns perm.
std::vector<Index> match_eigenvalues(const CVec& prev, const CVec& next);

// Largest |a_i - b_{π(i)}| under the optimal matching; infinity when sizes differ.
double multiset_distance(const CVec& a, const CVec& b);

}  // namespace minimax
