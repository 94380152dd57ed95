#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skitrack/dataset.hpp"
#include "skitrack/geometry.hpp"

namespace skitrack {

struct FramePrediction {
  BBox bbox;
  double confidence = 0.0;
};

/// What the metric needs from one frame.
struct FrameScore {
  double iou = 0.0;
  double confidence = 0.0;
  bool gt_present = true;
};

struct CurvePoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Long-term tracking scores: IoU-weighted precision and recall swept over
/// confidence thresholds, reported at the F1-maximising threshold.
struct SweepResult {
  std::vector<CurvePoint> curve;  // ascending threshold
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.0;
};

/// Throws EvaluationError("prediction/gt misalignment") on unequal lengths.
std::vector<FrameScore> score_frames(std::span<const FramePrediction> preds, const GroundTruth& gts);

/// Sweeps every observed confidence plus 0. Ties in F1 resolve to the
/// lowest threshold. Throws EvaluationError("empty ground truth") when no
/// frame has a target.
SweepResult sweep_thresholds(std::span<const FrameScore> frames);

SweepResult evaluate_sequence(std::span<const FramePrediction> preds, const GroundTruth& gts);

struct SequenceScores {
  std::string id;
  std::string discipline;
  std::vector<FrameScore> frames;
};

struct ReportRow {
  std::string discipline;  // "All", "AL", "JP", "FS"
  std::size_t frames = 0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.0;
};

struct EvalReport {
  std::vector<ReportRow> rows;       // All first, then AL, JP, FS as present
  std::vector<ReportRow> sequences;  // per sequence; `discipline` holds the sequence id
};

/// Pools frames per discipline (and across everything for "All") before
/// sweeping. Throws EvaluationError on an unknown discipline tag.
EvalReport aggregate_report(const std::vector<SequenceScores>& sequences);

using NamedReport = std::pair<std::string, EvalReport>;

/// Discipline x {F1, Precision, Recall} table, one column per variant.
std::string render_table(const std::vector<NamedReport>& variants);
std::string report_json(const std::vector<NamedReport>& variants);

std::string discipline_display_name(const std::string& tag);

}  // namespace skitrack
