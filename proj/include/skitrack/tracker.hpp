#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "skitrack/geometry.hpp"
#include "skitrack/image.hpp"
#include "skitrack/localizer.hpp"

namespace skitrack {

/// Inference hyperparameters. Defaults are the tuned values for
/// multi-camera ski footage.
struct TrackerConfig {
  double search_factor = 5.0;
  int search_size = 320;
  double template_factor = 2.0;
  int template_size = 128;
  int update_interval = 200;             // base template refresh period, frames
  double conf_threshold = 0.50;          // base refresh needs conf above this
  double itu_conf_threshold = 0.55;      // incremental refresh needs conf above this
  int itu_min_gap = 100;                 // ...and this many frames since the last refresh
  double reattempt_conf_threshold = 0.14;
  double reattempt_area_threshold = 105.0;  // px^2; predicted boxes this small trigger a reattempt
  double reattempt_frame_coverage = 0.60;   // the reattempt crop covers up to this fraction of the frame
  bool reattempt_enabled = true;
  bool itu_enabled = true;

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

enum class UpdateCause { none, base, itu };

std::string to_string(UpdateCause cause);

struct TrackerState {
  TemplateRef initial_template;
  TemplateRef dynamic_template;
  BBox prev_bbox;
  std::size_t last_update_frame = 0;
  std::size_t frame_index = 0;
  TrackerConfig config;
};

struct StepOutput {
  BBox bbox;  // frame coordinates, clipped
  double confidence = 0.0;
  bool reattempted = false;
  bool template_updated = false;
  UpdateCause update_cause = UpdateCause::none;
};

/// Builds both templates from the first-frame box.
/// Throws GeometryError("invalid initialization box") for a box with no
/// area or one that misses the frame.
TrackerState init_tracker(const Frame& frame, const BBox& gt_bbox, const TrackerConfig& config, Localizer& backend);

/// Advances the tracker by one frame. The input state is never modified,
/// so a throwing backend leaves the caller's state intact.
std::pair<TrackerState, StepOutput> step(const TrackerState& state, const Frame& frame, Localizer& backend);

/// True when a first-pass result should be retried over a wider crop.
bool needs_reattempt(double confidence, const BBox& bbox, const TrackerConfig& config);

/// Search factor that makes the reattempt crop cover `coverage` of the
/// frame (capped at the frame's short side), never below `floor_factor`.
double reattempt_factor(const BBox& prev_bbox, FrameDims frame, double coverage, double floor_factor);

/// Which template-update clause fires at frame `t`; base wins ties.
UpdateCause update_due(std::size_t t, double confidence, std::size_t last_update_frame, const TrackerConfig& config);

/// Runs init on frame 0 and step on every later frame. Errors are
/// rethrown as TrackingError carrying the failing frame index.
std::vector<StepOutput> run_sequence(const FrameSource& frames, const BBox& gt_first, const TrackerConfig& config,
                                     Localizer& backend);

}  // namespace skitrack
