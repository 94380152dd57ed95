#include "skitrack/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "skitrack/errors.hpp"

namespace skitrack {

void TrackerConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid tracker config: " + what); };
  if (!(search_factor > 0.0) || !(template_factor > 0.0)) fail("factors must be positive");
  if (search_size <= 0 || template_size <= 0) fail("crop sizes must be positive");
  if (update_interval < 1) fail("update_interval must be >= 1");
  if (itu_min_gap < 1) fail("itu_min_gap must be >= 1");
  if (!(0.0 <= reattempt_conf_threshold && reattempt_conf_threshold <= conf_threshold &&
        conf_threshold <= itu_conf_threshold && itu_conf_threshold <= 1.0))
    fail("thresholds must satisfy 0 <= reattempt <= conf <= itu <= 1");
  if (!(reattempt_frame_coverage > 0.0 && reattempt_frame_coverage <= 1.0))
    fail("reattempt_frame_coverage must be in (0, 1]");
  if (!(reattempt_area_threshold >= 0.0)) fail("reattempt_area_threshold must be >= 0");
}

std::string to_string(UpdateCause cause) {
  switch (cause) {
    case UpdateCause::base: return "base";
    case UpdateCause::itu: return "itu";
    case UpdateCause::none: break;
  }
  return "none";
}

bool needs_reattempt(double confidence, const BBox& bbox, const TrackerConfig& config) {
  return confidence < config.reattempt_conf_threshold || bbox.w * bbox.h <= config.reattempt_area_threshold;
}

double reattempt_factor(const BBox& prev_bbox, FrameDims frame, double coverage, double floor_factor) {
  if (!has_area(prev_bbox)) throw GeometryError("degenerate reference box");
  const double width = frame.width;
  const double height = frame.height;
  const double side = std::min(std::sqrt(coverage * width * height), std::min(width, height));
  return std::max(side / std::sqrt(prev_bbox.w * prev_bbox.h), floor_factor);
}

UpdateCause update_due(std::size_t t, double confidence, std::size_t last_update_frame, const TrackerConfig& config) {
  const auto interval = static_cast<std::size_t>(config.update_interval);
  if (t % interval == 0 && confidence > config.conf_threshold) return UpdateCause::base;
  if (config.itu_enabled && confidence > config.itu_conf_threshold &&
      t - last_update_frame >= static_cast<std::size_t>(config.itu_min_gap))
    return UpdateCause::itu;
  return UpdateCause::none;
}

TrackerState init_tracker(const Frame& frame, const BBox& gt_bbox, const TrackerConfig& config, Localizer& backend) {
  config.validate();
  if (!has_area(gt_bbox) || !has_area(clip_to_frame(gt_bbox, frame.dims)))
    throw GeometryError("invalid initialization box");

  const CropSpec crop = make_crop(gt_bbox, config.template_factor, config.template_size, frame.dims);
  TrackerState state;
  state.initial_template = backend.make_template(frame, crop);
  state.dynamic_template = state.initial_template;
  state.prev_bbox = gt_bbox;
  state.last_update_frame = frame.index;
  state.frame_index = frame.index;
  state.config = config;
  return state;
}

std::pair<TrackerState, StepOutput> step(const TrackerState& state, const Frame& frame, Localizer& backend) {
  const TrackerConfig& cfg = state.config;
  const std::size_t t = state.frame_index + 1;
  if (frame.index != t)
    throw TrackingError(frame.index, "expected frame " + std::to_string(t));

  auto locate = [&](const CropSpec& crop) {
    LocalizerResult r = backend.localize(state.initial_template, state.dynamic_template, crop, frame);
    validate_result(r);
    return std::pair{clip_to_frame(local_to_global(r.bbox_local, crop), frame.dims), r.confidence};
  };

  const CropSpec search = make_crop(state.prev_bbox, cfg.search_factor, cfg.search_size, frame.dims);
  auto [bbox, conf] = locate(search);

  StepOutput out;
  if (cfg.reattempt_enabled && needs_reattempt(conf, bbox, cfg)) {
    out.reattempted = true;
    const double factor =
        reattempt_factor(state.prev_bbox, frame.dims, cfg.reattempt_frame_coverage, cfg.search_factor);
    const CropSpec wide = make_crop(state.prev_bbox, factor, cfg.search_size, frame.dims);
    auto [bbox2, conf2] = locate(wide);
    if (conf2 > conf) {
      bbox = bbox2;
      conf = conf2;
    }
  }
  out.bbox = bbox;
  out.confidence = conf;

  TrackerState next = state;
  next.frame_index = t;
  const UpdateCause cause = update_due(t, conf, state.last_update_frame, cfg);
  // A zero-area prediction cannot seed a template crop.
  if (cause != UpdateCause::none && has_area(bbox)) {
    next.dynamic_template =
        backend.make_template(frame, make_crop(bbox, cfg.template_factor, cfg.template_size, frame.dims));
    next.last_update_frame = t;
    out.template_updated = true;
    out.update_cause = cause;
  }
  // Same reason: a collapsed box cannot seed the next search crop.
  if (has_area(bbox)) next.prev_bbox = bbox;
  return {std::move(next), out};
}

std::vector<StepOutput> run_sequence(const FrameSource& frames, const BBox& gt_first, const TrackerConfig& config,
                                     Localizer& backend) {
  std::vector<StepOutput> outputs;
  if (frames.size() == 0) throw TrackingError(0, "empty sequence");
  TrackerState state;
  try {
    state = init_tracker(frames.frame(0), gt_first, config, backend);
  } catch (const TrackingError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrackingError(0, e.what());
  }
  outputs.reserve(frames.size() - 1);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    try {
      auto [next, out] = step(state, frames.frame(i), backend);
      state = std::move(next);
      outputs.push_back(out);
    } catch (const TrackingError&) {
      throw;
    } catch (const std::exception& e) {
      throw TrackingError(i, e.what());
    }
  }
  return outputs;
}

}  // namespace skitrack
