#include "skitrack/evaluation.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "skitrack/errors.hpp"

namespace skitrack {
namespace {

const std::vector<std::string> kRowOrder{"All", "AL", "JP", "FS"};

ReportRow make_row(std::string name, std::span<const FrameScore> frames) {
  const SweepResult s = sweep_thresholds(frames);
  return {std::move(name), frames.size(), s.f1, s.precision, s.recall, s.threshold};
}

}  // namespace

std::vector<FrameScore> score_frames(std::span<const FramePrediction> preds, const GroundTruth& gts) {
  if (preds.size() != gts.size()) throw EvaluationError("prediction/gt misalignment");
  std::vector<FrameScore> frames;
  frames.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    FrameScore f;
    f.confidence = preds[i].confidence;
    f.gt_present = gts[i].has_value();
    f.iou = f.gt_present ? iou(preds[i].bbox, *gts[i]) : 0.0;
    frames.push_back(f);
  }
  return frames;
}

SweepResult sweep_thresholds(std::span<const FrameScore> frames) {
  const auto n_gt = static_cast<std::size_t>(std::count_if(frames.begin(), frames.end(), [](const FrameScore& f) { return f.gt_present; }));
  if (n_gt == 0) throw EvaluationError("empty ground truth");

  std::vector<FrameScore> sorted(frames.begin(), frames.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const FrameScore& a, const FrameScore& b) { return a.confidence > b.confidence; });

  // Walk thresholds from high to low; a frame enters once theta <= its confidence.
  std::vector<CurvePoint> curve;
  double iou_sum = 0.0;
  std::size_t predicted = 0;
  std::size_t i = 0;
  auto emit = [&](double theta) {
    CurvePoint p;
    p.threshold = theta;
    p.precision = predicted > 0 ? iou_sum / static_cast<double>(predicted) : 0.0;
    p.recall = iou_sum / static_cast<double>(n_gt);
    p.f1 = p.precision + p.recall > 0.0 ? 2.0 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
    curve.push_back(p);
  };
  while (i < sorted.size()) {
    const double theta = sorted[i].confidence;
    if (theta <= 0.0) break;
    while (i < sorted.size() && sorted[i].confidence == theta) {
      if (sorted[i].gt_present) {
        iou_sum += sorted[i].iou;
        ++predicted;
      }
      ++i;
    }
    emit(theta);
  }
  for (; i < sorted.size(); ++i) {
    if (sorted[i].gt_present) {
      iou_sum += sorted[i].iou;
      ++predicted;
    }
  }
  emit(0.0);
  std::reverse(curve.begin(), curve.end());

  SweepResult result;
  const CurvePoint* best = &curve.front();
  for (const auto& p : curve) {
    if (p.f1 > best->f1) best = &p;
  }
  result.f1 = best->f1;
  result.precision = best->precision;
  result.recall = best->recall;
  result.threshold = best->threshold;
  result.curve = std::move(curve);
  return result;
}

SweepResult evaluate_sequence(std::span<const FramePrediction> preds, const GroundTruth& gts) {
  return sweep_thresholds(score_frames(preds, gts));
}

EvalReport aggregate_report(const std::vector<SequenceScores>& sequences) {
  if (sequences.empty()) throw EvaluationError("no sequences to aggregate");
  std::map<std::string, std::vector<FrameScore>> pooled;
  std::vector<FrameScore> all;
  EvalReport report;
  for (const auto& s : sequences) {
    if (!is_known_discipline(s.discipline))
      throw EvaluationError("unknown discipline '" + s.discipline + "' for sequence " + s.id);
    auto& bucket = pooled[s.discipline];
    bucket.insert(bucket.end(), s.frames.begin(), s.frames.end());
    all.insert(all.end(), s.frames.begin(), s.frames.end());
    report.sequences.push_back(make_row(s.id, s.frames));
  }
  report.rows.push_back(make_row("All", all));
  for (const auto& tag : kRowOrder) {
    const auto it = pooled.find(tag);
    if (it != pooled.end()) report.rows.push_back(make_row(tag, it->second));
  }
  return report;
}

std::string discipline_display_name(const std::string& tag) {
  if (tag == "AL") return "Alpine";
  if (tag == "JP") return "Jumping";
  if (tag == "FS") return "Freestyle";
  return tag;
}

std::string render_table(const std::vector<NamedReport>& variants) {
  std::size_t col = 9;
  for (const auto& [name, report] : variants) col = std::max(col, name.size());

  std::string out = fmt::format("{:<11}{:<11}", "Discipline", "Metric");
  for (const auto& [name, report] : variants) out += fmt::format("  {:>{}}", name, col);
  out += '\n';

  for (const auto& tag : kRowOrder) {
    const bool any = std::any_of(variants.begin(), variants.end(), [&](const NamedReport& v) {
      return std::any_of(v.second.rows.begin(), v.second.rows.end(), [&](const ReportRow& r) { return r.discipline == tag; });
    });
    if (!any) continue;
    const char* metrics[] = {"F1-score", "Precision", "Recall"};
    for (int m = 0; m < 3; ++m) {
      out += fmt::format("{:<11}{:<11}", m == 0 ? discipline_display_name(tag) : "", metrics[m]);
      for (const auto& [name, report] : variants) {
        const auto it = std::find_if(report.rows.begin(), report.rows.end(),
                                     [&](const ReportRow& r) { return r.discipline == tag; });
        if (it == report.rows.end()) {
          out += fmt::format("  {:>{}}", "-", col);
          continue;
        }
        const double v = m == 0 ? it->f1 : m == 1 ? it->precision : it->recall;
        out += fmt::format("  {:>{}.3f}", v, col);
      }
      out += '\n';
    }
  }
  return out;
}

std::string report_json(const std::vector<NamedReport>& variants) {
  auto row_json = [](const ReportRow& r, const char* key) {
    nlohmann::ordered_json j;
    j[key] = r.discipline;
    j["frames"] = r.frames;
    j["f1"] = r.f1;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["threshold"] = r.threshold;
    return j;
  };
  nlohmann::ordered_json doc;
  doc["variants"] = nlohmann::ordered_json::array();
  for (const auto& [name, report] : variants) {
    nlohmann::ordered_json v;
    v["name"] = name;
    v["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) v["rows"].push_back(row_json(r, "discipline"));
    v["sequences"] = nlohmann::ordered_json::array();
    for (const auto& r : report.sequences) v["sequences"].push_back(row_json(r, "id"));
    doc["variants"].push_back(std::move(v));
  }
  return doc.dump(2) + "\n";
}

}  // namespace skitrack
