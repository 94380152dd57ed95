#pragma once

// Pixel-space box arithmetic shared by every other module. Coordinates are
// continuous reals; nothing here touches pixels.

namespace skitrack {

struct BBox {
  double x = 0.0;  // left edge
  double y = 0.0;  // top edge
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct FrameDims {
  int width = 1;
  int height = 1;

  friend bool operator==(const FrameDims&, const FrameDims&) = default;
};

/// A square region of a frame, resampled to out_size x out_size.
struct CropSpec {
  double center_x = 0.0;
  double center_y = 0.0;
  double side = 1.0;
  int out_size = 1;
  FrameDims frame;

  double scale() const { return static_cast<double>(out_size) / side; }
  double origin_x() const { return center_x - side / 2.0; }
  double origin_y() const { return center_y - side / 2.0; }
  /// The crop square in frame coordinates.
  BBox square() const { return {origin_x(), origin_y(), side, side}; }

  friend bool operator==(const CropSpec&, const CropSpec&) = default;
};

inline constexpr double kMinCropSide = 2.0;

/// Square crop centred on `reference` with side = factor * sqrt(w * h),
/// never smaller than kMinCropSide.
/// Throws GeometryError("degenerate reference box") for zero-area input.
CropSpec make_crop(const BBox& reference, double factor, int out_size, FrameDims frame);

BBox local_to_global(const BBox& local, const CropSpec& crop);
BBox global_to_local(const BBox& global, const CropSpec& crop);

/// Intersection with [0, width] x [0, height]. An empty intersection
/// collapses to a zero-area box on the nearest boundary.
BBox clip_to_frame(const BBox& box, FrameDims frame);

BBox intersection(const BBox& a, const BBox& b);
double iou(const BBox& a, const BBox& b);

/// True when the box has strictly positive, finite area.
bool has_area(const BBox& box);

}  // namespace skitrack
