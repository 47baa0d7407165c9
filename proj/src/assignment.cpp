#include "hug/assignment.hpp"

#include <limits>

namespace hug {

namespace {

// Potentials-based Hungarian method; requires rows <= cols.
std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  const std::size_t m = a.front().size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1), v(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
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
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::vector<std::optional<std::size_t>> min_cost_assignment(
    const std::vector<std::vector<double>>& cost) {
  std::vector<std::optional<std::size_t>> result(cost.size());
  if (cost.empty() || cost.front().empty()) return result;
  const std::size_t rows = cost.size();
  const std::size_t cols = cost.front().size();
  if (rows <= cols) {
    const auto r2c = hungarian(cost);
    for (std::size_t i = 0; i < rows; ++i) result[i] = r2c[i];
    return result;
  }
  std::vector<std::vector<double>> t(cols, std::vector<double>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t[j][i] = cost[i][j];
  }
  const auto c2r = hungarian(t);
  for (std::size_t j = 0; j < cols; ++j) result[c2r[j]] = j;
  return result;
}

}  // namespace hug
