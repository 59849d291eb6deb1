#pragma once

#include "locreward/model.hpp"

namespace locreward::geometry {

/// Componentwise hull of two boxes.
BBox enclosing(const BBox& a, const BBox& b) noexcept;

/// Area of the overlap; 0 when the boxes are disjoint or only share an edge.
double intersection_area(const BBox& a, const BBox& b) noexcept;

/// Intersection over union, in [0, 1].
double iou(const BBox& a, const BBox& b) noexcept;

/// Generalized IoU: IoU minus the fraction of the enclosing box not covered
/// by the union. Range [-1, 1]; equals IoU when one box contains the other.
double giou(const BBox& a, const BBox& b) noexcept;

}  // namespace locreward::geometry
