#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "mfh/segments.hpp"

namespace mfh {

/// Minimum-cost perfect matching on a square cost matrix.
///
/// Shortest augmenting paths with Dijkstra over reduced costs (the Hungarian
/// method in its O(n^3) Jonker-Volgenant form). Dual potentials are initialized by
/// row and column reduction and tight edges are matched greedily before the
/// augmentation phase; matched edges stay tight and all reduced costs stay
/// nonnegative throughout, so the result is optimal.
///
/// Returns row_to_col, a permutation of 0..n-1.
inline std::vector<std::size_t> solve_assignment(const Mat& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  if (cost.cols() != cost.rows()) throw ShapeError("solve_assignment: cost matrix must be square");
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  // Indices 1..n; column 0 is the virtual root used by the augmentation.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> col_owner(n + 1, 0), row_match(n + 1, kNone);
  auto c = [&](std::size_t i, std::size_t j) {
    return cost(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
  };

  for (std::size_t i = 1; i <= n; ++i) {
    double best = kInf;
    for (std::size_t j = 1; j <= n; ++j) best = std::min(best, c(i, j));
    u[i] = best;
  }
  for (std::size_t j = 1; j <= n; ++j) {
    double best = kInf;
    for (std::size_t i = 1; i <= n; ++i) best = std::min(best, c(i, j) - u[i]);
    v[j] = best;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      if (col_owner[j] == 0 && c(i, j) - u[i] - v[j] == 0.0) {
        col_owner[j] = i;
        row_match[i] = j;
        break;
      }
    }
  }

  std::vector<double> min_slack(n + 1);
  std::vector<std::size_t> via(n + 1);
  std::vector<char> visited(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    if (row_match[row] != kNone) continue;
    col_owner[0] = row;
    std::size_t j0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(visited.begin(), visited.end(), 0);
    do {
      visited[j0] = 1;
      const std::size_t i0 = col_owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (visited[j]) continue;
        const double reduced = c(i0, j) - u[i0] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          via[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (visited[j]) {
          u[col_owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_owner[j0] != 0);
    do {
      const std::size_t j1 = via[j0];
      col_owner[j0] = col_owner[j1];
      j0 = j1;
    } while (j0 != 0);
    for (std::size_t j = 1; j <= n; ++j) row_match[col_owner[j]] = j;
  }

  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[col_owner[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace mfh
