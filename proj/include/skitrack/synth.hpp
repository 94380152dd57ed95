#pragma once

// Seeded, scripted worlds that reproduce the failure modes of multi-camera
// ski footage: camera switches that teleport the skier, occlusions, and
// abrupt scale changes. Scripts drive the ScriptedLocalizer; no pixels are
// ever rendered.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skitrack/dataset.hpp"
#include "skitrack/scripted_localizer.hpp"

namespace skitrack::synth {

enum class EventKind { camera_switch, occlusion, scale_jump };

struct Event {
  EventKind kind = EventKind::camera_switch;
  std::size_t frame = 1;
  std::size_t end_frame = 0;  // occlusion only, inclusive
  // camera_switch: centre offset in multiples of sqrt(target area).
  double dx = 0.0;
  double dy = 0.0;
  // scale_jump: area-preserving aspect change on top of a uniform scale.
  double scale = 1.0;
  double aspect = 1.0;

  /// L-infinity size of a camera switch, in sqrt-area multiples.
  double displacement() const;
};

struct Waypoint {
  std::size_t frame = 0;
  double cx = 0.0;
  double cy = 0.0;
};

struct ScaleKey {
  std::size_t frame = 0;
  double scale = 1.0;
};

/// Piecewise-linear centre and scale paths, held constant past the ends.
struct Motion {
  double width = 40.0;
  double height = 40.0;
  std::vector<Waypoint> path;
  std::vector<ScaleKey> scale_path;
};

struct ScenarioScript {
  std::string id;
  std::string family;      // cs | occ | sc | mix | custom
  std::string discipline = "AL";
  FrameDims frame_dims{1280, 720};
  std::size_t length = 300;
  Motion motion;
  std::vector<Event> events;
  double noise_rel = 0.02;
  std::uint64_t seed = 0;
};

/// Throws ScenarioError describing the first violated invariant.
void validate(const ScenarioScript& script);

struct GeneratedSequence {
  ScriptedWorld world;
  SequenceRecord record;
};

/// Dense ground truth plus visibility for every frame.
/// Throws ScenarioError("infeasible script") if the target ever leaves the
/// frame entirely or a camera switch lands its centre off-frame.
GeneratedSequence generate_world(const ScenarioScript& script);

inline const std::vector<std::string> kFamilies{"cs", "occ", "sc", "mix"};

/// Camera-switch displacements are drawn from this range (sqrt-area multiples).
inline constexpr double kMinSwitchMultiple = 3.0;
inline constexpr double kMaxSwitchMultiple = 10.0;

/// `variants` seeded scripts per requested family ("all" expands to every family).
std::vector<ScenarioScript> scenario_suite(std::uint64_t seed, const std::string& selector = "all",
                                           std::size_t variants = 100);

/// 1280x720, 300 frames, a 40x40 target moving linearly and a camera
/// switch of 8 sqrt-area multiples (320 px) at frame 150.
ScenarioScript canonical_cs1();
/// Static 40x40 target occluded on frames 100..130.
ScenarioScript canonical_occ1();

nlohmann::ordered_json to_json(const ScenarioScript& script);
ScenarioScript script_from_json(const nlohmann::json& json);

std::string to_string(EventKind kind);

}  // namespace skitrack::synth
