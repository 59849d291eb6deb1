#include "locreward/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "locreward/geometry.hpp"

namespace locreward::assignment {

CostMatrix CostMatrix::transposed() const {
  CostMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

CostMatrix cost_matrix(std::span<const BBox> preds, std::span<const BBox> gts) {
  CostMatrix c(preds.size(), gts.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      c(i, j) = 1.0 - geometry::giou(preds[i], gts[j]);
    }
  }
  return c;
}

Matching solve(const CostMatrix& cost) {
  const std::size_t m = cost.rows();
  const std::size_t n = cost.cols();
  Matching out;
  if (m == 0 || n == 0) return out;

  double max_entry = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double v = cost(r, c);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument, "cost matrix contains a non-finite entry");
      }
      max_entry = std::max(max_entry, std::abs(v));
    }
  }

  // Padding rows/columns all carry the same sentinel, so they shift the
  // optimum by a constant and never change which real pairs are chosen.
  const std::size_t k = std::max(m, n);
  const double sentinel = 2.0 * max_entry + 1.0;
  const auto at = [&](std::size_t r, std::size_t c) {
    return (r < m && c < n) ? cost(r, c) : sentinel;
  };

  // 1-based potentials formulation: u over rows, v over columns, p[col] is
  // the row currently assigned to col (0 = free).
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<std::size_t> p(k + 1, 0), way(k + 1, 0);
  for (std::size_t row = 1; row <= k; ++row) {
    p[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(k + 1, kInf);
    std::vector<char> used(k + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t row0 = p[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= k; ++col) {
        if (used[col]) continue;
        const double cur = at(row0 - 1, col - 1) - u[row0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= k; ++col) {
        if (used[col]) {
          u[p[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (p[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      p[col0] = p[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<std::size_t> row_to_col(k, k);
  for (std::size_t col = 1; col <= k; ++col) {
    if (p[col] != 0) row_to_col[p[col] - 1] = col - 1;
  }
  out.pairs.reserve(std::min(m, n));
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t c = row_to_col[r];
    if (c < n) {
      out.pairs.emplace_back(r, c);
      out.total_cost += cost(r, c);
    }
  }
  return out;
}

}  // namespace locreward::assignment
