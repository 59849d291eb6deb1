#pragma once

// Reference implementations used only by the tests. Each one is written
// along a different route from the library code it checks: enumeration
// instead of optimisation, rasterisation instead of interval algebra,
// flood fill instead of union-find.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <tuple>
#include <vector>

#include "locreward/model.hpp"

namespace oracle {

using locreward::BBox;

// ---- geometry -------------------------------------------------------------

// Unit-cell rasterisation of integer boxes. Counts cells covered by a, b,
// both, either, and the cells of the smallest box containing both.
struct RasterAreas {
  long long a = 0, b = 0, inter = 0, uni = 0, hull = 0;
};

inline RasterAreas raster(const BBox& a, const BBox& b) {
  RasterAreas r;
  const long long lo_x = static_cast<long long>(std::min(a.x1, b.x1));
  const long long lo_y = static_cast<long long>(std::min(a.y1, b.y1));
  const long long hi_x = static_cast<long long>(std::max(a.x2, b.x2));
  const long long hi_y = static_cast<long long>(std::max(a.y2, b.y2));
  const auto inside = [](const BBox& q, double cx, double cy) {
    return cx > q.x1 && cx < q.x2 && cy > q.y1 && cy < q.y2;
  };
  for (long long y = lo_y; y < hi_y; ++y) {
    for (long long x = lo_x; x < hi_x; ++x) {
      const double cx = static_cast<double>(x) + 0.5;
      const double cy = static_cast<double>(y) + 0.5;
      const bool in_a = inside(a, cx, cy);
      const bool in_b = inside(b, cx, cy);
      ++r.hull;
      r.a += in_a;
      r.b += in_b;
      r.inter += in_a && in_b;
      r.uni += in_a || in_b;
    }
  }
  return r;
}

inline double raster_iou(const BBox& a, const BBox& b) {
  const auto r = raster(a, b);
  return static_cast<double>(r.inter) / static_cast<double>(r.uni);
}

inline double raster_giou(const BBox& a, const BBox& b) {
  const auto r = raster(a, b);
  return static_cast<double>(r.inter) / static_cast<double>(r.uni) -
         static_cast<double>(r.hull - r.uni) / static_cast<double>(r.hull);
}

// Inclusion-exclusion over the four corners, long double throughout.
inline long double exact_giou(const BBox& a, const BBox& b) {
  using LD = long double;
  const LD ix = std::max<LD>(0, std::min<LD>(a.x2, b.x2) - std::max<LD>(a.x1, b.x1));
  const LD iy = std::max<LD>(0, std::min<LD>(a.y2, b.y2) - std::max<LD>(a.y1, b.y1));
  const LD inter = ix * iy;
  const LD area_a = (LD(a.x2) - a.x1) * (LD(a.y2) - a.y1);
  const LD area_b = (LD(b.x2) - b.x1) * (LD(b.y2) - b.y1);
  const LD uni = area_a + area_b - inter;
  const LD hull = (std::max<LD>(a.x2, b.x2) - std::min<LD>(a.x1, b.x1)) *
                  (std::max<LD>(a.y2, b.y2) - std::min<LD>(a.y1, b.y1));
  return inter / uni - (hull - uni) / hull;
}

// ---- assignment -----------------------------------------------------------

// Minimum over every injective map from the smaller side into the larger,
// enumerated with next_permutation on the larger index set. Each candidate
// is summed in row order so equal pairings give bitwise-equal totals.
inline double brute_force_min_cost(const std::vector<std::vector<double>>& c) {
  const std::size_t rows = c.size();
  const std::size_t cols = rows ? c[0].size() : 0;
  if (rows == 0 || cols == 0) return 0.0;
  const bool rows_small = rows <= cols;
  const std::size_t small = rows_small ? rows : cols;
  const std::size_t large = rows_small ? cols : rows;
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> col_of_row(rows);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::fill(col_of_row.begin(), col_of_row.end(), cols);
    for (std::size_t i = 0; i < small; ++i) {
      if (rows_small) {
        col_of_row[i] = perm[i];
      } else {
        col_of_row[perm[i]] = i;
      }
    }
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (col_of_row[r] < cols) total += c[r][col_of_row[r]];
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// ---- advantages / KL ------------------------------------------------------

inline std::vector<long double> zscores(const std::vector<double>& r) {
  long double mean = 0;
  for (double v : r) mean += v;
  mean /= static_cast<long double>(r.size());
  long double var = 0;
  for (double v : r) var += (v - mean) * (v - mean);
  var /= static_cast<long double>(r.size());
  std::vector<long double> out;
  for (double v : r) out.push_back((v - mean) / std::sqrt(var));
  return out;
}

// log softmax(logits)[k] in long double.
inline long double log_softmax_at(const std::vector<double>& logits, std::size_t k) {
  long double peak = *std::max_element(logits.begin(), logits.end());
  long double z = 0;
  for (double l : logits) z += std::exp(static_cast<long double>(l) - peak);
  return static_cast<long double>(logits[k]) - peak - std::log(z);
}

inline long double weighted_loglik(const std::vector<double>& logits,
                                   const std::vector<std::size_t>& chosen,
                                   const std::vector<double>& adv) {
  long double s = 0;
  for (std::size_t i = 0; i < chosen.size(); ++i) s += adv[i] * log_softmax_at(logits, chosen[i]);
  return s;
}

// Central finite-difference gradient of f at x.
inline std::vector<double> central_difference(
    const std::function<long double(const std::vector<double>&)>& f, std::vector<double> x,
    double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double keep = x[k];
    x[k] = keep + h;
    const long double up = f(x);
    x[k] = keep - h;
    const long double down = f(x);
    x[k] = keep;
    g[k] = static_cast<double>((up - down) / (2.0L * h));
  }
  return g;
}

// ---- masks ----------------------------------------------------------------

struct Grid {
  std::size_t w = 0, h = 0;
  std::vector<std::uint8_t> px;
  bool at(long long x, long long y) const {
    return x >= 0 && y >= 0 && x < static_cast<long long>(w) && y < static_cast<long long>(h) &&
           px[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] != 0;
  }
};

// Pixel is set iff any source pixel lies within the Chebyshev radius
// iterations * (k / 2), which is what repeated square dilation amounts to.
inline Grid dilate(const Grid& g, std::size_t k, std::size_t iterations) {
  const long long r = static_cast<long long>(iterations * (k / 2));
  Grid out{g.w, g.h, std::vector<std::uint8_t>(g.px.size(), 0)};
  for (long long y = 0; y < static_cast<long long>(g.h); ++y) {
    for (long long x = 0; x < static_cast<long long>(g.w); ++x) {
      bool on = false;
      for (long long dy = -r; dy <= r && !on; ++dy)
        for (long long dx = -r; dx <= r && !on; ++dx) on = g.at(x + dx, y + dy);
      out.px[static_cast<std::size_t>(y) * g.w + static_cast<std::size_t>(x)] = on;
    }
  }
  return out;
}

// BFS flood fill, 8-connectivity. Returns half-open boxes sorted by
// (y1, x1, y2, x2); distinct components can share a top-left corner.
inline std::vector<BBox> flood_boxes(const Grid& g) {
  std::vector<std::uint8_t> seen(g.px.size(), 0);
  std::vector<BBox> boxes;
  for (std::size_t sy = 0; sy < g.h; ++sy) {
    for (std::size_t sx = 0; sx < g.w; ++sx) {
      if (!g.px[sy * g.w + sx] || seen[sy * g.w + sx]) continue;
      std::size_t x0 = sx, x1 = sx, y0 = sy, y1 = sy;
      std::queue<std::pair<std::size_t, std::size_t>> q;
      q.push({sx, sy});
      seen[sy * g.w + sx] = 1;
      while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop();
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const long long nx = static_cast<long long>(x) + dx;
            const long long ny = static_cast<long long>(y) + dy;
            if (!g.at(nx, ny)) continue;
            const std::size_t idx = static_cast<std::size_t>(ny) * g.w + static_cast<std::size_t>(nx);
            if (seen[idx]) continue;
            seen[idx] = 1;
            q.push({static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)});
          }
        }
      }
      boxes.push_back({double(x0), double(y0), double(x1 + 1), double(y1 + 1)});
    }
  }
  std::sort(boxes.begin(), boxes.end(), [](const BBox& a, const BBox& b) {
    return std::tie(a.y1, a.x1, a.y2, a.x2) < std::tie(b.y1, b.x1, b.y2, b.x2);
  });
  return boxes;
}

}  // namespace oracle
