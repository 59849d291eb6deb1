#include "locreward/geometry.hpp"

#include <algorithm>

namespace locreward::geometry {

BBox enclosing(const BBox& a, const BBox& b) noexcept {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

double intersection_area(const BBox& a, const BBox& b) noexcept {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) noexcept {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double giou(const BBox& a, const BBox& b) noexcept {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  const double hull = enclosing(a, b).area();
  // hull - uni can round below zero when one box contains the other.
  const double slack = std::max(hull - uni, 0.0) / hull;
  return std::clamp(iou(a, b) - slack, -1.0, 1.0);
}

}  // namespace locreward::geometry
