#include "skitrack/localizer.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "skitrack/errors.hpp"
#include "skitrack/scripted_localizer.hpp"

namespace skitrack {

void validate_result(const LocalizerResult& result) {
  const BBox& b = result.bbox_local;
  if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.w) || !std::isfinite(b.h))
    throw ProtocolViolation("non-finite bbox");
  if (b.w < 0.0 || b.h < 0.0) throw ProtocolViolation("negative bbox size");
  if (!std::isfinite(result.confidence) || result.confidence < 0.0 || result.confidence > 1.0)
    throw ProtocolViolation("confidence outside [0,1]");
}

double containment(const BBox& target, const CropSpec& crop) {
  const double area = target.area();
  if (!(area > 0.0)) return 0.0;
  return intersection(target, crop.square()).area() / area;
}

namespace {

std::mt19937_64 call_rng(std::uint64_t seed, std::size_t frame, const CropSpec& crop) {
  std::vector<std::uint32_t> words;
  auto push64 = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push64(seed);
  push64(frame);
  push64(std::bit_cast<std::uint64_t>(crop.center_x));
  push64(std::bit_cast<std::uint64_t>(crop.center_y));
  push64(std::bit_cast<std::uint64_t>(crop.side));
  push64(static_cast<std::uint64_t>(crop.out_size));
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

bool center_inside(const BBox& target, const CropSpec& crop) {
  const double cx = target.center_x();
  const double cy = target.center_y();
  return cx >= crop.origin_x() && cx <= crop.origin_x() + crop.side && cy >= crop.origin_y() &&
         cy <= crop.origin_y() + crop.side;
}

}  // namespace

ScriptedLocalizer::ScriptedLocalizer(ScriptedWorld world) : world_(std::move(world)) {
  if (world_.visible.size() != world_.gt.size())
    throw ConfigError("scripted world: visibility and ground truth lengths differ");
  if (world_.noise_rel < 0.0) throw ConfigError("scripted world: negative noise");
}

TemplateRef ScriptedLocalizer::make_template(const Frame& frame, const CropSpec& crop) {
  return {frame.index, crop, nullptr};
}

LocalizerResult ScriptedLocalizer::localize(const TemplateRef&, const TemplateRef&,
                                            const CropSpec& search_crop, const Frame& frame) {
  if (frame.index >= world_.gt.size())
    throw LocalizerUnavailable("frame " + std::to_string(frame.index) + " outside scripted world");

  auto rng = call_rng(world_.seed, frame.index, search_crop);
  const BBox& gt = world_.gt[frame.index];
  const ScriptedConfidenceModel& m = world_.model;

  if (world_.visible[frame.index] && has_area(gt) && center_inside(gt, search_crop)) {
    BBox noisy = gt;
    const double sigma = world_.noise_rel * std::sqrt(gt.w * gt.h);
    if (sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, sigma);
      noisy.x += noise(rng);
      noisy.y += noise(rng);
      noisy.w = std::max(gt.w + noise(rng), 0.1 * gt.w);
      noisy.h = std::max(gt.h + noise(rng), 0.1 * gt.h);
    }
    return {global_to_local(noisy, search_crop), m.found_base + m.found_gain * containment(gt, search_crop)};
  }

  // Lost: a low score and a small box somewhere inside the crop.
  const double out = search_crop.out_size;
  std::uniform_real_distribution<double> conf(0.0, m.lost_max);
  std::uniform_real_distribution<double> side_frac(m.lost_box_min, m.lost_box_max);
  LocalizerResult result;
  result.confidence = conf(rng);
  const double w = side_frac(rng) * out;
  const double h = side_frac(rng) * out;
  std::uniform_real_distribution<double> px(0.0, out - w);
  std::uniform_real_distribution<double> py(0.0, out - h);
  result.bbox_local = {px(rng), py(rng), w, h};
  return result;
}

}  // namespace skitrack
