#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fmt/format.h>

#include "skitrack/dataset.hpp"
#include "skitrack/errors.hpp"
#include "skitrack/evaluation.hpp"
#include "skitrack/geometry.hpp"
#include "skitrack/scripted_localizer.hpp"
#include "skitrack/synth.hpp"
#include "skitrack/tracker.hpp"

namespace py = pybind11;
using namespace skitrack;

namespace {

synth::ScenarioScript parse_script(const std::string& json_text) {
  try {
    return synth::script_from_json(nlohmann::json::parse(json_text));
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("malformed scenario script: ") + e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Single-object tracking core: geometry, tracker, evaluation and synthetic scenarios";

  auto base = py::register_exception<Error>(m, "SkitrackError");
  py::register_exception<GeometryError>(m, "GeometryError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<DatasetError>(m, "DatasetError", base);
  py::register_exception<EvaluationError>(m, "EvaluationError", base);
  py::register_exception<ScenarioError>(m, "ScenarioError", base);

  py::class_<BBox>(m, "BBox")
      .def(py::init<>())
      .def(py::init<double, double, double, double>(), py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"))
      .def_readwrite("x", &BBox::x)
      .def_readwrite("y", &BBox::y)
      .def_readwrite("w", &BBox::w)
      .def_readwrite("h", &BBox::h)
      .def("area", &BBox::area)
      .def("center", [](const BBox& b) { return py::make_tuple(b.center_x(), b.center_y()); })
      .def(py::self == py::self)
      .def("__iter__", [](const BBox& b) { return py::iter(py::make_tuple(b.x, b.y, b.w, b.h)); })
      .def("__repr__", [](const BBox& b) { return fmt::format("BBox({}, {}, {}, {})", b.x, b.y, b.w, b.h); });

  py::class_<FrameDims>(m, "FrameDims")
      .def(py::init([](int w, int h) { return FrameDims{w, h}; }), py::arg("width"), py::arg("height"))
      .def_readwrite("width", &FrameDims::width)
      .def_readwrite("height", &FrameDims::height);

  py::class_<CropSpec>(m, "CropSpec")
      .def_readonly("center_x", &CropSpec::center_x)
      .def_readonly("center_y", &CropSpec::center_y)
      .def_readonly("side", &CropSpec::side)
      .def_readonly("out_size", &CropSpec::out_size)
      .def("scale", &CropSpec::scale)
      .def("square", &CropSpec::square);

  m.def("make_crop", &make_crop, py::arg("reference"), py::arg("factor"), py::arg("out_size"), py::arg("frame"));
  m.def("local_to_global", &local_to_global, py::arg("local"), py::arg("crop"));
  m.def("global_to_local", &global_to_local, py::arg("global_box"), py::arg("crop"));
  m.def("clip_to_frame", &clip_to_frame, py::arg("box"), py::arg("frame"));
  m.def("iou", &iou, py::arg("a"), py::arg("b"));

  py::class_<TrackerConfig>(m, "TrackerConfig")
      .def(py::init<>())
      .def_readwrite("search_factor", &TrackerConfig::search_factor)
      .def_readwrite("search_size", &TrackerConfig::search_size)
      .def_readwrite("template_factor", &TrackerConfig::template_factor)
      .def_readwrite("template_size", &TrackerConfig::template_size)
      .def_readwrite("update_interval", &TrackerConfig::update_interval)
      .def_readwrite("conf_threshold", &TrackerConfig::conf_threshold)
      .def_readwrite("itu_conf_threshold", &TrackerConfig::itu_conf_threshold)
      .def_readwrite("itu_min_gap", &TrackerConfig::itu_min_gap)
      .def_readwrite("reattempt_conf_threshold", &TrackerConfig::reattempt_conf_threshold)
      .def_readwrite("reattempt_area_threshold", &TrackerConfig::reattempt_area_threshold)
      .def_readwrite("reattempt_frame_coverage", &TrackerConfig::reattempt_frame_coverage)
      .def_readwrite("reattempt_enabled", &TrackerConfig::reattempt_enabled)
      .def_readwrite("itu_enabled", &TrackerConfig::itu_enabled)
      .def("validate", &TrackerConfig::validate);

  py::class_<StepOutput>(m, "StepOutput")
      .def_readonly("bbox", &StepOutput::bbox)
      .def_readonly("confidence", &StepOutput::confidence)
      .def_readonly("reattempted", &StepOutput::reattempted)
      .def_readonly("template_updated", &StepOutput::template_updated)
      .def_property_readonly("update_cause", [](const StepOutput& o) { return to_string(o.update_cause); });

  m.def("needs_reattempt", &needs_reattempt, py::arg("confidence"), py::arg("bbox"), py::arg("config") = TrackerConfig{});
  m.def("reattempt_factor", &reattempt_factor, py::arg("prev_bbox"), py::arg("frame"), py::arg("coverage") = 0.6,
        py::arg("floor_factor") = 5.0);
  m.def(
      "update_cause",
      [](std::size_t t, double confidence, std::size_t last_update, const TrackerConfig& cfg) {
        return to_string(update_due(t, confidence, last_update, cfg));
      },
      py::arg("t"), py::arg("confidence"), py::arg("last_update"), py::arg("config") = TrackerConfig{});

  m.def("compute_sampling_weights", &compute_sampling_weights, py::arg("counts"));

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("f1", &SweepResult::f1)
      .def_readonly("precision", &SweepResult::precision)
      .def_readonly("recall", &SweepResult::recall)
      .def_readonly("threshold", &SweepResult::threshold)
      .def_property_readonly("curve", [](const SweepResult& s) {
        py::list out;
        for (const auto& p : s.curve) out.append(py::make_tuple(p.threshold, p.precision, p.recall, p.f1));
        return out;
      });

  m.def(
      "sweep_thresholds",
      [](const std::vector<std::tuple<double, double, bool>>& frames) {
        std::vector<FrameScore> scores;
        scores.reserve(frames.size());
        for (const auto& [i, c, present] : frames) scores.push_back({i, c, present});
        return sweep_thresholds(scores);
      },
      py::arg("frames"), "frames: (iou, confidence, gt_present) triples");

  m.def(
      "scenario_suite",
      [](std::uint64_t seed, const std::string& selector, std::size_t variants) {
        std::vector<std::string> out;
        for (const auto& s : synth::scenario_suite(seed, selector, variants)) out.push_back(synth::to_json(s).dump());
        return out;
      },
      py::arg("seed"), py::arg("selector") = "all", py::arg("variants") = 100, "Scenario scripts as JSON strings");
  m.def(
      "canonical_script",
      [](const std::string& name) {
        if (name == "CS-1") return synth::to_json(synth::canonical_cs1()).dump();
        if (name == "OCC-1") return synth::to_json(synth::canonical_occ1()).dump();
        throw ScenarioError("unknown canonical script '" + name + "' (CS-1, OCC-1)");
      },
      py::arg("name"));
  m.def(
      "ground_truth",
      [](const std::string& script) { return synth::generate_world(parse_script(script)).record.gt; },
      py::arg("script"));
  m.def(
      "track_script",
      [](const std::string& script_json, const TrackerConfig& cfg) {
        const auto script = parse_script(script_json);
        const auto g = synth::generate_world(script);
        ScriptedLocalizer loc(g.world);
        py::gil_scoped_release release;
        return run_sequence(BlankFrameSource(script.frame_dims, script.length), *g.record.gt.front(), cfg, loc);
      },
      py::arg("script"), py::arg("config") = TrackerConfig{},
      "Tracks a scenario script with the scripted localizer; one output per frame after the first");
}
