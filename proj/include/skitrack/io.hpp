#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "skitrack/evaluation.hpp"
#include "skitrack/tracker.hpp"

namespace skitrack {

/// One "x,y,w,h,confidence" line per tracked frame.
std::string format_predictions(std::span<const StepOutput> outputs);

/// One JSON object per tracked frame; frame numbers start at `first_frame`.
std::string format_telemetry(std::span<const StepOutput> outputs, std::size_t first_frame = 1);

/// Throws ParseError with the offending line number.
std::vector<FramePrediction> parse_predictions(const std::string& text);
std::vector<FramePrediction> load_predictions(const std::filesystem::path& path);

/// Pairs predictions with ground truth. Prediction files normally start at
/// frame 1 (frame 0 is the initialisation frame); a file with one line per
/// frame is also accepted. Any other length is a misalignment.
GroundTruth align_groundtruth(std::size_t prediction_count, const GroundTruth& gt);

}  // namespace skitrack
