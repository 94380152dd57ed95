#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "skitrack/geometry.hpp"

namespace skitrack {

/// Row-major interleaved 8-bit RGB.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t at(int x, int y, int c) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

/// Binary PPM (P6, maxval 255).
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Bilinear resample of the crop square to out_size x out_size. Samples
/// falling outside the source read as zero. A null source yields an
/// all-zero image of the right size.
Image sample_crop(const Image* source, const CropSpec& crop);

/// One frame as seen by the tracker. Pixels are optional: synthetic
/// sequences have none, and only pixel-consuming backends look at them.
struct Frame {
  std::size_t index = 0;
  FrameDims dims;
  std::shared_ptr<const Image> pixels;
};

/// Random-access source of frames for a single sequence.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::size_t size() const = 0;
  virtual Frame frame(std::size_t index) const = 0;
};

/// Pixel-free frames of fixed dimensions.
class BlankFrameSource final : public FrameSource {
 public:
  BlankFrameSource(FrameDims dims, std::size_t count) : dims_(dims), count_(count) {}
  std::size_t size() const override { return count_; }
  Frame frame(std::size_t index) const override;

 private:
  FrameDims dims_;
  std::size_t count_;
};

/// Frames stored as one .ppm file each, ordered by file name.
class PpmDirectorySource final : public FrameSource {
 public:
  explicit PpmDirectorySource(const std::filesystem::path& dir);
  std::size_t size() const override { return files_.size(); }
  Frame frame(std::size_t index) const override;

 private:
  std::vector<std::filesystem::path> files_;
};

}  // namespace skitrack
