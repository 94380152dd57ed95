#include "skitrack/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "skitrack/errors.hpp"

namespace skitrack {

bool has_area(const BBox& box) {
  const double a = box.area();
  return std::isfinite(a) && box.w > 0.0 && box.h > 0.0;
}

CropSpec make_crop(const BBox& reference, double factor, int out_size, FrameDims frame) {
  if (!has_area(reference)) throw GeometryError("degenerate reference box");
  if (!(factor > 0.0) || !std::isfinite(factor)) throw GeometryError("crop factor must be positive");
  if (out_size <= 0) throw GeometryError("crop output size must be positive");

  CropSpec crop;
  crop.center_x = reference.center_x();
  crop.center_y = reference.center_y();
  crop.side = std::max(factor * std::sqrt(reference.w * reference.h), kMinCropSide);
  crop.out_size = out_size;
  crop.frame = frame;
  return crop;
}

BBox local_to_global(const BBox& local, const CropSpec& crop) {
  const double scale = crop.scale();
  return {crop.origin_x() + local.x / scale, crop.origin_y() + local.y / scale, local.w / scale,
          local.h / scale};
}

BBox global_to_local(const BBox& global, const CropSpec& crop) {
  const double scale = crop.scale();
  return {(global.x - crop.origin_x()) * scale, (global.y - crop.origin_y()) * scale,
          global.w * scale, global.h * scale};
}

BBox clip_to_frame(const BBox& box, FrameDims frame) {
  const double width = frame.width;
  const double height = frame.height;
  const double x0 = std::clamp(box.x, 0.0, width);
  const double y0 = std::clamp(box.y, 0.0, height);
  const double x1 = std::clamp(box.x + box.w, x0, width);
  const double y1 = std::clamp(box.y + box.h, y0, height);
  return {x0, y0, x1 - x0, y1 - y0};
}

BBox intersection(const BBox& a, const BBox& b) {
  const double x0 = std::max(a.x, b.x);
  const double y0 = std::max(a.y, b.y);
  const double x1 = std::min(a.x + a.w, b.x + b.w);
  const double y1 = std::min(a.y + a.h, b.y + b.h);
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0.0, 0.0};
  return {x0, y0, x1 - x0, y1 - y0};
}

double iou(const BBox& a, const BBox& b) {
  // (x + w) - x need not round back to w.
  if (a == b) return has_area(a) ? 1.0 : 0.0;
  const double inter = intersection(a, b).area();
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace skitrack
