#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "locreward/model.hpp"

namespace locreward::assignment {

/// Dense row-major matrix of assignment costs.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  CostMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A minimum-cost injective pairing of rows (predictions) and columns
/// (ground truth). Pairs are sorted by row index.
struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_cost = 0.0;
};

/// C_ij = 1 - GIoU(pred_i, gt_j); entries lie in [0, 2].
CostMatrix cost_matrix(std::span<const BBox> preds, std::span<const BBox> gts);

/// Kuhn-Munkres with row/column potentials, O(k^3) for k = max(rows, cols).
/// Rectangular input is padded to square; the result has min(rows, cols)
/// pairs and total_cost is the sum of matched entries in row order.
/// Throws InvalidArgument on non-finite entries.
Matching solve(const CostMatrix& cost);

}  // namespace locreward::assignment
