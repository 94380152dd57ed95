#include "skitrack/io.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "skitrack/errors.hpp"
#include "skitrack/text.hpp"

namespace skitrack {

std::string format_predictions(std::span<const StepOutput> outputs) {
  std::string out;
  for (const auto& o : outputs) {
    out += format_number(o.bbox.x) + ',' + format_number(o.bbox.y) + ',' + format_number(o.bbox.w) + ',' +
           format_number(o.bbox.h) + ',' + format_number(o.confidence) + '\n';
  }
  return out;
}

std::string format_telemetry(std::span<const StepOutput> outputs, std::size_t first_frame) {
  std::string out;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& o = outputs[i];
    nlohmann::ordered_json j;
    j["frame"] = first_frame + i;
    j["reattempted"] = o.reattempted;
    j["template_updated"] = o.template_updated;
    j["update_cause"] = to_string(o.update_cause);
    j["confidence"] = o.confidence;
    out += j.dump() + '\n';
  }
  return out;
}

std::vector<FramePrediction> parse_predictions(const std::string& text) {
  std::vector<FramePrediction> preds;
  const auto lines = split(text, '\n');
  std::size_t last = lines.size();
  while (last > 0 && trim(lines[last - 1]).empty()) --last;
  for (std::size_t i = 0; i < last; ++i) {
    const auto fields = split(trim(lines[i]), ',');
    if (fields.size() != 5) throw ParseError(i + 1, "expected x,y,w,h,confidence");
    double v[5];
    for (std::size_t k = 0; k < 5; ++k) {
      const auto parsed = parse_number(fields[k]);
      if (!parsed || !std::isfinite(*parsed)) throw ParseError(i + 1, "not a finite number");
      v[k] = *parsed;
    }
    if (v[4] < 0.0 || v[4] > 1.0) throw ParseError(i + 1, "confidence outside [0,1]");
    preds.push_back({BBox{v[0], v[1], v[2], v[3]}, v[4]});
  }
  return preds;
}

std::vector<FramePrediction> load_predictions(const std::filesystem::path& path) {
  try {
    return parse_predictions(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

GroundTruth align_groundtruth(std::size_t prediction_count, const GroundTruth& gt) {
  if (prediction_count + 1 == gt.size()) return GroundTruth(gt.begin() + 1, gt.end());
  if (prediction_count == gt.size()) return gt;
  throw EvaluationError("prediction/gt misalignment");
}

}  // namespace skitrack
