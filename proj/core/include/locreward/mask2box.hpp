#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "locreward/model.hpp"

namespace locreward::mask2box {

/// Row-major binary grid; non-zero bytes are foreground.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(std::size_t width, std::size_t height);
  /// Throws InvalidArgument unless data.size() == width * height and both
  /// dimensions are positive.
  BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> data);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  const std::vector<std::uint8_t>& data() const noexcept { return data_; }

  bool at(std::size_t x, std::size_t y) const { return data_[y * width_ + x] != 0; }
  void set(std::size_t x, std::size_t y, bool on = true) { data_[y * width_ + x] = on ? 1 : 0; }
  std::size_t count() const noexcept;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

struct Pixel {
  std::size_t x = 0;
  std::size_t y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct Options {
  std::size_t kernel = 5;
  std::size_t iterations = 1;
  double min_area = 0.0;
};

/// Binary dilation with a kernel x kernel square, clipped at the borders,
/// applied `iterations` times. Throws EvenKernel for even or zero kernels.
BinaryMask dilate(const BinaryMask& mask, std::size_t kernel, std::size_t iterations);

/// 8-connected components ordered by their first pixel in raster order;
/// pixels within a component are in raster order.
std::vector<std::vector<Pixel>> components(const BinaryMask& mask);

/// Half-open enclosing box [min_x, min_y, max_x + 1, max_y + 1].
BBox enclosing_box(const std::vector<Pixel>& component);

/// dilate -> components -> enclosing boxes, dropping boxes with area below
/// min_area, sorted by (y1, x1, y2, x2).
std::vector<BBox> to_boxes(const BinaryMask& mask, const Options& opts);

}  // namespace locreward::mask2box
