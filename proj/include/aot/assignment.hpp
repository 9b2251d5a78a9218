#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "aot/gauss.hpp"

namespace aot {

struct Assignment {
  double cost = 0.0;
  std::vector<Index> column_of_row;
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with row/column potentials, O(n^3)).
inline Assignment solve_assignment(const Matrix& cost) {
  detail::require_square(cost, "assignment cost");
  detail::require_finite(cost, "assignment cost");
  const Index n = cost.rows();
  constexpr double inf = std::numeric_limits<double>::infinity();

  // 1-based internal indexing; column 0 is a virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> row_of_col(n + 1, 0), way(n + 1, 0);
  std::vector<double> min_slack(n + 1);
  std::vector<char> used(n + 1);

  for (Index i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    Index j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Index i0 = row_of_col[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double slack = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (slack < min_slack[j]) {
          min_slack[j] = slack;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const Index j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment result;
  result.column_of_row.assign(n, 0);
  for (Index j = 1; j <= n; ++j) result.column_of_row[row_of_col[j] - 1] = j - 1;
  for (Index i = 0; i < n; ++i) result.cost += cost(i, result.column_of_row[i]);
  return result;
}

}  // namespace aot
