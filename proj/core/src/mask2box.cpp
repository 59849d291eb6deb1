#include "locreward/mask2box.hpp"

#include <algorithm>
#include <string>

namespace locreward::mask2box {

BinaryMask::BinaryMask(std::size_t width, std::size_t height)
    : BinaryMask(width, height, std::vector<std::uint8_t>(width * height, 0)) {}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width_ == 0 || height_ == 0) {
    throw Error(ErrorCode::InvalidArgument, "mask dimensions must be positive");
  }
  if (data_.size() != width_ * height_) {
    throw Error(ErrorCode::InvalidArgument,
                "mask data has " + std::to_string(data_.size()) + " bytes, expected " +
                    std::to_string(width_ * height_));
  }
  for (auto& b : data_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

namespace {

// One pass of a square max-filter, done separably: rows, then columns.
BinaryMask dilate_once(const BinaryMask& in, std::size_t radius) {
  const std::size_t w = in.width();
  const std::size_t h = in.height();
  BinaryMask horiz(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!in.at(x, y)) continue;
      const std::size_t lo = x >= radius ? x - radius : 0;
      const std::size_t hi = std::min(w - 1, x + radius);
      for (std::size_t xx = lo; xx <= hi; ++xx) horiz.set(xx, y);
    }
  }
  BinaryMask out(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!horiz.at(x, y)) continue;
      const std::size_t lo = y >= radius ? y - radius : 0;
      const std::size_t hi = std::min(h - 1, y + radius);
      for (std::size_t yy = lo; yy <= hi; ++yy) out.set(x, yy);
    }
  }
  return out;
}

// Union-find over provisional labels.
struct DisjointSet {
  std::vector<std::size_t> parent;

  std::size_t make() {
    parent.push_back(parent.size());
    return parent.size() - 1;
  }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

BinaryMask dilate(const BinaryMask& mask, std::size_t kernel, std::size_t iterations) {
  if (kernel == 0 || kernel % 2 == 0) {
    throw Error(ErrorCode::EvenKernel,
                "kernel side must be odd and >= 1, got " + std::to_string(kernel));
  }
  BinaryMask out = mask;
  if (kernel == 1) return out;
  for (std::size_t i = 0; i < iterations; ++i) out = dilate_once(out, kernel / 2);
  return out;
}

std::vector<std::vector<Pixel>> components(const BinaryMask& mask) {
  const std::size_t w = mask.width();
  const std::size_t h = mask.height();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(w * h, kNone);
  DisjointSet sets;

  // Two-pass labelling: provisional labels from the already-visited
  // neighbours (W, NW, N, NE), equivalences merged on the fly.
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      std::size_t mine = kNone;
      const auto visit = [&](std::size_t nx, std::size_t ny) {
        const std::size_t l = label[ny * w + nx];
        if (l == kNone) return;
        if (mine == kNone) {
          mine = l;
        } else {
          sets.unite(mine, l);
        }
      };
      if (x > 0) visit(x - 1, y);
      if (y > 0) {
        if (x > 0) visit(x - 1, y - 1);
        visit(x, y - 1);
        if (x + 1 < w) visit(x + 1, y - 1);
      }
      label[y * w + x] = mine == kNone ? sets.make() : mine;
    }
  }

  std::vector<std::size_t> slot(sets.parent.size(), kNone);
  std::vector<std::vector<Pixel>> out;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t l = label[y * w + x];
      if (l == kNone) continue;
      const std::size_t root = sets.find(l);
      if (slot[root] == kNone) {
        slot[root] = out.size();
        out.emplace_back();
      }
      out[slot[root]].push_back({x, y});
    }
  }
  return out;
}

BBox enclosing_box(const std::vector<Pixel>& component) {
  if (component.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot enclose an empty component");
  }
  std::size_t x0 = component.front().x, x1 = x0, y0 = component.front().y, y1 = y0;
  for (const Pixel& p : component) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1 + 1),
          static_cast<double>(y1 + 1)};
}

std::vector<BBox> to_boxes(const BinaryMask& mask, const Options& opts) {
  const BinaryMask grown = dilate(mask, opts.kernel, opts.iterations);
  std::vector<BBox> boxes;
  for (const auto& comp : components(grown)) {
    const BBox b = enclosing_box(comp);
    if (b.area() < opts.min_area) continue;
    boxes.push_back(b);
  }
  std::sort(boxes.begin(), boxes.end(), [](const BBox& a, const BBox& b) {
    if (a.y1 != b.y1) return a.y1 < b.y1;
    if (a.x1 != b.x1) return a.x1 < b.x1;
    if (a.y2 != b.y2) return a.y2 < b.y2;
    return a.x2 < b.x2;
  });
  return boxes;
}

}  // namespace locreward::mask2box
