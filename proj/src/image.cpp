#include "skitrack/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "skitrack/errors.hpp"

namespace skitrack {
namespace {

// Reads the next whitespace-separated header token, skipping # comments.
std::string next_token(std::istream& in) {
  std::string token;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(c);
  }
  return token;
}

double sample_channel(const Image& src, double x, double y, int c) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto px = [&](int xi, int yi) -> double {
    if (xi < 0 || yi < 0 || xi >= src.width || yi >= src.height) return 0.0;
    return src.at(xi, yi, c);
  };
  return (1 - fy) * ((1 - fx) * px(x0, y0) + fx * px(x0 + 1, y0)) +
         fy * ((1 - fx) * px(x0, y0 + 1) + fx * px(x0 + 1, y0 + 1));
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open frame " + path.string());
  if (next_token(in) != "P6") throw DatasetError("not a binary PPM: " + path.string());
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw DatasetError("bad PPM header: " + path.string());
  }
  if (w <= 0 || h <= 0 || maxval != 255) throw DatasetError("unsupported PPM: " + path.string());
  Image image(w, h);
  in.read(reinterpret_cast<char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.rgb.size()))
    throw DatasetError("truncated PPM: " + path.string());
  return image;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
  if (!out) throw DatasetError("cannot write " + path.string());
}

Image sample_crop(const Image* source, const CropSpec& crop) {
  Image out(crop.out_size, crop.out_size);
  if (source == nullptr) return out;
  const double step = crop.side / crop.out_size;
  for (int v = 0; v < crop.out_size; ++v) {
    // Pixel centres map to pixel centres.
    const double sy = crop.origin_y() + (v + 0.5) * step - 0.5;
    for (int u = 0; u < crop.out_size; ++u) {
      const double sx = crop.origin_x() + (u + 0.5) * step - 0.5;
      for (int c = 0; c < 3; ++c) {
        const double value = std::round(sample_channel(*source, sx, sy, c));
        out.rgb[(static_cast<std::size_t>(v) * crop.out_size + u) * 3 + c] =
            static_cast<std::uint8_t>(std::clamp(value, 0.0, 255.0));
      }
    }
  }
  return out;
}

Frame BlankFrameSource::frame(std::size_t index) const {
  if (index >= count_) throw DatasetError("frame index out of range");
  return {index, dims_, nullptr};
}

PpmDirectorySource::PpmDirectorySource(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DatasetError("frame directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files_.push_back(entry.path());
  }
  std::sort(files_.begin(), files_.end());
}

Frame PpmDirectorySource::frame(std::size_t index) const {
  if (index >= files_.size()) throw DatasetError("frame index out of range");
  auto image = std::make_shared<const Image>(read_ppm(files_[index]));
  return {index, FrameDims{image->width, image->height}, std::move(image)};
}

}  // namespace skitrack
