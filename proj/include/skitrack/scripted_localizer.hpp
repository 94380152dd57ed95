#pragma once

#include <cstdint>
#include <vector>

#include "skitrack/localizer.hpp"

namespace skitrack {

/// Constants of the synthetic confidence model. They are harness
/// parameters chosen so that "found" and "lost" land on opposite sides of
/// the default tracker thresholds.
struct ScriptedConfidenceModel {
  double found_base = 0.6;
  double found_gain = 0.35;  // scaled by the contained fraction of the target
  double lost_max = 0.14;    // lost confidences are drawn from [0, lost_max)
  double lost_box_min = 0.02;  // lost-box side range, as a fraction of out_size
  double lost_box_max = 0.10;
};

/// Hidden ground truth that the scripted backend "sees".
struct ScriptedWorld {
  std::vector<BBox> gt;
  std::vector<bool> visible;
  double noise_rel = 0.0;  // Gaussian sigma as a fraction of sqrt(gt area)
  std::uint64_t seed = 0;
  ScriptedConfidenceModel model;
};

/// Deterministic, pixel-free localizer driven by a ScriptedWorld. Each
/// answer is a pure function of (world, frame index, search crop).
class ScriptedLocalizer final : public Localizer {
 public:
  explicit ScriptedLocalizer(ScriptedWorld world);

  TemplateRef make_template(const Frame& frame, const CropSpec& crop) override;
  LocalizerResult localize(const TemplateRef& initial_template, const TemplateRef& dynamic_template,
                           const CropSpec& search_crop, const Frame& frame) override;

  const ScriptedWorld& world() const { return world_; }

 private:
  ScriptedWorld world_;
};

/// Fraction of `target`'s area lying inside the crop square.
double containment(const BBox& target, const CropSpec& crop);

}  // namespace skitrack
