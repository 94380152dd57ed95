#include "skitrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "skitrack/errors.hpp"

namespace skitrack::synth {
namespace {

constexpr std::size_t kSuiteLength = 300;
constexpr FrameDims kSuiteDims{1280, 720};
constexpr double kSafeMargin = 150.0;
constexpr double kMaxSpeedRel = 0.08;  // per-frame centre speed, sqrt-area multiples
const std::vector<std::string> kDisciplines{"AL", "JP", "FS"};

template <typename Key, typename Get>
double interpolate(const std::vector<Key>& keys, std::size_t t, Get get, double fallback) {
  if (keys.empty()) return fallback;
  if (t <= keys.front().frame) return get(keys.front());
  if (t >= keys.back().frame) return get(keys.back());
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (t <= keys[i].frame) {
      const auto& a = keys[i - 1];
      const auto& b = keys[i];
      const double u = static_cast<double>(t - a.frame) / static_cast<double>(b.frame - a.frame);
      return get(a) + u * (get(b) - get(a));
    }
  }
  return get(keys.back());
}

// Size of the target at frame t, before any camera-switch offset.
void size_at(const ScenarioScript& s, std::size_t t, double& w, double& h) {
  const double base_scale = interpolate(s.motion.scale_path, t, [](const ScaleKey& k) { return k.scale; }, 1.0);
  w = s.motion.width * base_scale;
  h = s.motion.height * base_scale;
  for (const auto& e : s.events) {
    if (e.kind != EventKind::scale_jump || e.frame > t) continue;
    const double r = std::sqrt(e.aspect);
    w *= e.scale * r;
    h *= e.scale / r;
  }
}

double path_x(const ScenarioScript& s, std::size_t t) {
  return interpolate(s.motion.path, t, [](const Waypoint& p) { return p.cx; }, 0.0);
}
double path_y(const ScenarioScript& s, std::size_t t) {
  return interpolate(s.motion.path, t, [](const Waypoint& p) { return p.cy; }, 0.0);
}

std::mt19937_64 variant_rng(std::uint64_t seed, std::size_t family, std::size_t variant) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(family), static_cast<std::uint32_t>(variant)};
  return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

ScenarioScript random_base(std::mt19937_64& rng, const std::string& family, std::size_t variant, std::uint64_t seed) {
  ScenarioScript s;
  s.id = fmt::format("{}-{:03}", family, variant + 1);
  s.family = family;
  s.discipline = kDisciplines[variant % kDisciplines.size()];
  s.frame_dims = kSuiteDims;
  s.length = kSuiteLength;
  s.seed = seed * 1000003u + variant;
  s.motion.width = uniform(rng, 30.0, 60.0);
  s.motion.height = s.motion.width * uniform(rng, 0.8, 1.5);
  const double root_area = std::sqrt(s.motion.width * s.motion.height);

  const double x_lo = kSafeMargin, x_hi = kSuiteDims.width - kSafeMargin;
  const double y_lo = kSafeMargin, y_hi = kSuiteDims.height - kSafeMargin;
  Waypoint p{0, uniform(rng, x_lo, x_hi), uniform(rng, y_lo, y_hi)};
  s.motion.path.push_back(p);
  for (std::size_t frame : {s.length / 2, s.length - 1}) {
    const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double speed = uniform(rng, 0.0, kMaxSpeedRel * root_area);
    const double span = static_cast<double>(frame - p.frame);
    p = {frame, std::clamp(p.cx + std::cos(angle) * speed * span, x_lo, x_hi),
         std::clamp(p.cy + std::sin(angle) * speed * span, y_lo, y_hi)};
    s.motion.path.push_back(p);
  }
  return s;
}

// Picks a switch offset whose target centre stays on-frame for the rest of
// the sequence; false if no horizontal direction fits.
bool place_switch(std::mt19937_64& rng, const ScenarioScript& s, Event& e, double multiple) {
  double w = 0.0, h = 0.0;
  size_at(s, e.frame, w, h);
  const double root_area = std::sqrt(w * h);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (std::size_t t = e.frame; t < s.length; ++t) {
    xmin = std::min(xmin, path_x(s, t));
    xmax = std::max(xmax, path_x(s, t));
    ymin = std::min(ymin, path_y(s, t));
    ymax = std::max(ymax, path_y(s, t));
  }
  const double shift = multiple * root_area;
  const double W = s.frame_dims.width, H = s.frame_dims.height;
  const bool right = xmax + shift <= W - w / 2.0;
  const bool left = xmin - shift >= w / 2.0;
  if (!right && !left) return false;
  double sign = right ? 1.0 : -1.0;
  if (right && left) sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
  const double dy_lo = std::max(-multiple, (h / 2.0 - ymin) / root_area);
  const double dy_hi = std::min(multiple, (H - h / 2.0 - ymax) / root_area);
  e.kind = EventKind::camera_switch;
  e.dx = sign * multiple;
  e.dy = dy_lo < dy_hi ? uniform(rng, dy_lo, dy_hi) : 0.0;
  return true;
}

ScenarioScript make_variant(std::uint64_t seed, std::size_t family_index, std::size_t variant) {
  const std::string& family = kFamilies[family_index];
  auto rng = variant_rng(seed, family_index, variant);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    ScenarioScript s = random_base(rng, family, variant, seed);
    bool ok = true;
    if (family == "cs") {
      Event e;
      e.frame = uniform_int(rng, 60, 240);
      ok = place_switch(rng, s, e, uniform(rng, kMinSwitchMultiple, kMaxSwitchMultiple));
      s.events.push_back(e);
    } else if (family == "occ") {
      Event e;
      e.kind = EventKind::occlusion;
      e.frame = uniform_int(rng, 40, 220);
      e.end_frame = e.frame + uniform_int(rng, 10, 60) - 1;
      s.events.push_back(e);
    } else if (family == "sc") {
      Event e;
      e.kind = EventKind::scale_jump;
      e.frame = uniform_int(rng, 60, 240);
      e.scale = std::exp(uniform(rng, std::log(0.25), std::log(4.0)));
      e.aspect = uniform(rng, 0.7, 1.4);
      s.events.push_back(e);
    } else {
      Event cs;
      cs.frame = uniform_int(rng, 60, 110);
      ok = place_switch(rng, s, cs, uniform(rng, kMinSwitchMultiple, kMaxSwitchMultiple));
      Event occ;
      occ.kind = EventKind::occlusion;
      occ.frame = uniform_int(rng, 130, 180);
      occ.end_frame = occ.frame + uniform_int(rng, 10, 40) - 1;
      Event sc;
      sc.kind = EventKind::scale_jump;
      sc.frame = uniform_int(rng, 230, 260);
      sc.scale = std::exp(uniform(rng, std::log(0.5), std::log(2.0)));
      sc.aspect = uniform(rng, 0.8, 1.25);
      s.events = {cs, occ, sc};
    }
    if (!ok) continue;
    try {
      generate_world(s);
    } catch (const ScenarioError&) {
      continue;
    }
    return s;
  }
  throw ScenarioError("could not generate a feasible " + family + " script");
}

EventKind kind_from_string(const std::string& s) {
  if (s == "camera_switch") return EventKind::camera_switch;
  if (s == "occlusion") return EventKind::occlusion;
  if (s == "scale_jump") return EventKind::scale_jump;
  throw ScenarioError("unknown event kind '" + s + "'");
}

}  // namespace

double Event::displacement() const { return std::max(std::abs(dx), std::abs(dy)); }

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::camera_switch: return "camera_switch";
    case EventKind::occlusion: return "occlusion";
    case EventKind::scale_jump: return "scale_jump";
  }
  return "unknown";
}

void validate(const ScenarioScript& s) {
  auto fail = [&](const std::string& what) { throw ScenarioError("script " + s.id + ": " + what); };
  if (s.length < 1) fail("length must be >= 1");
  if (s.frame_dims.width < 1 || s.frame_dims.height < 1) fail("frame dims must be positive");
  if (!(s.motion.width > 0.0) || !(s.motion.height > 0.0)) fail("target size must be positive");
  if (s.motion.path.empty()) fail("motion path is empty");
  for (std::size_t i = 1; i < s.motion.path.size(); ++i)
    if (s.motion.path[i].frame <= s.motion.path[i - 1].frame) fail("path frames must increase");
  for (std::size_t i = 0; i < s.motion.scale_path.size(); ++i) {
    if (!(s.motion.scale_path[i].scale > 0.0)) fail("scale path values must be positive");
    if (i > 0 && s.motion.scale_path[i].frame <= s.motion.scale_path[i - 1].frame) fail("scale path frames must increase");
  }
  if (s.noise_rel < 0.0) fail("noise must be non-negative");
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const Event& e = s.events[i];
    if (e.frame < 1 || e.frame >= s.length) fail("event frame outside [1, length)");
    if (i > 0 && e.frame <= s.events[i - 1].frame) fail("event frames must strictly increase");
    if (e.kind == EventKind::occlusion && (e.end_frame < e.frame || e.end_frame >= s.length))
      fail("occlusion end outside [frame, length)");
    if (e.kind == EventKind::scale_jump && (!(e.scale > 0.0) || !(e.aspect > 0.0)))
      fail("scale jump factors must be positive");
  }
}

GeneratedSequence generate_world(const ScenarioScript& s) {
  validate(s);
  GeneratedSequence out;
  out.world.gt.reserve(s.length);
  out.world.visible.assign(s.length, true);
  out.world.noise_rel = s.noise_rel;
  out.world.seed = s.seed;

  double off_x = 0.0, off_y = 0.0;
  for (std::size_t t = 0; t < s.length; ++t) {
    double w = 0.0, h = 0.0;
    size_at(s, t, w, h);
    for (const auto& e : s.events) {
      if (e.kind == EventKind::camera_switch && e.frame == t) {
        const double root_area = std::sqrt(w * h);
        off_x += e.dx * root_area;
        off_y += e.dy * root_area;
        const double cx = path_x(s, t) + off_x;
        const double cy = path_y(s, t) + off_y;
        if (cx < 0.0 || cy < 0.0 || cx > s.frame_dims.width || cy > s.frame_dims.height)
          throw ScenarioError("infeasible script: camera switch at frame " + std::to_string(t) + " leaves the frame");
      }
      if (e.kind == EventKind::occlusion && t >= e.frame && t <= e.end_frame) out.world.visible[t] = false;
    }
    const BBox box{path_x(s, t) + off_x - w / 2.0, path_y(s, t) + off_y - h / 2.0, w, h};
    if (!has_area(box) || !has_area(clip_to_frame(box, s.frame_dims)))
      throw ScenarioError("infeasible script: target outside the frame at frame " + std::to_string(t));
    out.world.gt.push_back(box);
  }

  SequenceRecord& r = out.record;
  r.id = s.id;
  r.discipline = s.discipline;
  r.frame_count = s.length;
  r.frame_dims = s.frame_dims;
  r.gt.assign(out.world.gt.begin(), out.world.gt.end());
  r.frame_source = "synth:" + s.id;
  return out;
}

std::vector<ScenarioScript> scenario_suite(std::uint64_t seed, const std::string& selector, std::size_t variants) {
  std::vector<ScenarioScript> suite;
  bool matched = false;
  for (std::size_t f = 0; f < kFamilies.size(); ++f) {
    if (selector != "all" && selector != kFamilies[f]) continue;
    matched = true;
    for (std::size_t v = 0; v < variants; ++v) suite.push_back(make_variant(seed, f, v));
  }
  if (!matched) throw ScenarioError("unknown scenario family '" + selector + "'");
  return suite;
}

ScenarioScript canonical_cs1() {
  ScenarioScript s;
  s.id = "CS-1";
  s.family = "cs";
  s.frame_dims = {1280, 720};
  s.length = 300;
  s.motion.width = 40.0;
  s.motion.height = 40.0;
  s.motion.path = {{0, 200.0, 360.0}, {299, 500.0, 360.0}};
  Event e;
  e.kind = EventKind::camera_switch;
  e.frame = 150;
  e.dx = 8.0;
  s.events.push_back(e);
  s.seed = 1;
  return s;
}

ScenarioScript canonical_occ1() {
  ScenarioScript s;
  s.id = "OCC-1";
  s.family = "occ";
  s.frame_dims = {1280, 720};
  s.length = 300;
  s.motion.width = 40.0;
  s.motion.height = 40.0;
  s.motion.path = {{0, 640.0, 360.0}};
  Event e;
  e.kind = EventKind::occlusion;
  e.frame = 100;
  e.end_frame = 130;
  s.events.push_back(e);
  s.seed = 2;
  return s;
}

nlohmann::ordered_json to_json(const ScenarioScript& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["family"] = s.family;
  j["discipline"] = s.discipline;
  j["width"] = s.frame_dims.width;
  j["height"] = s.frame_dims.height;
  j["length"] = s.length;
  j["seed"] = s.seed;
  j["noise_rel"] = s.noise_rel;
  nlohmann::ordered_json motion;
  motion["width"] = s.motion.width;
  motion["height"] = s.motion.height;
  motion["path"] = nlohmann::ordered_json::array();
  for (const auto& p : s.motion.path) motion["path"].push_back({{"frame", p.frame}, {"cx", p.cx}, {"cy", p.cy}});
  motion["scale_path"] = nlohmann::ordered_json::array();
  for (const auto& k : s.motion.scale_path) motion["scale_path"].push_back({{"frame", k.frame}, {"scale", k.scale}});
  j["motion"] = std::move(motion);
  j["events"] = nlohmann::ordered_json::array();
  for (const auto& e : s.events) {
    nlohmann::ordered_json ej;
    ej["kind"] = to_string(e.kind);
    ej["frame"] = e.frame;
    switch (e.kind) {
      case EventKind::camera_switch:
        ej["dx"] = e.dx;
        ej["dy"] = e.dy;
        break;
      case EventKind::occlusion:
        ej["end_frame"] = e.end_frame;
        break;
      case EventKind::scale_jump:
        ej["scale"] = e.scale;
        ej["aspect"] = e.aspect;
        break;
    }
    j["events"].push_back(std::move(ej));
  }
  return j;
}

ScenarioScript script_from_json(const nlohmann::json& j) {
  ScenarioScript s;
  try {
    s.id = j.at("id").get<std::string>();
    s.family = j.value("family", std::string("custom"));
    s.discipline = j.value("discipline", std::string("AL"));
    s.frame_dims = {j.at("width").get<int>(), j.at("height").get<int>()};
    s.length = j.at("length").get<std::size_t>();
    s.seed = j.value("seed", std::uint64_t{0});
    s.noise_rel = j.value("noise_rel", 0.0);
    const auto& m = j.at("motion");
    s.motion.width = m.at("width").get<double>();
    s.motion.height = m.at("height").get<double>();
    for (const auto& p : m.at("path"))
      s.motion.path.push_back({p.at("frame").get<std::size_t>(), p.at("cx").get<double>(), p.at("cy").get<double>()});
    if (m.contains("scale_path"))
      for (const auto& k : m["scale_path"])
        s.motion.scale_path.push_back({k.at("frame").get<std::size_t>(), k.at("scale").get<double>()});
    for (const auto& ej : j.value("events", nlohmann::json::array())) {
      Event e;
      e.kind = kind_from_string(ej.at("kind").get<std::string>());
      e.frame = ej.at("frame").get<std::size_t>();
      e.end_frame = ej.value("end_frame", std::size_t{0});
      e.dx = ej.value("dx", 0.0);
      e.dy = ej.value("dy", 0.0);
      e.scale = ej.value("scale", 1.0);
      e.aspect = ej.value("aspect", 1.0);
      s.events.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("malformed scenario script: ") + e.what());
  }
  validate(s);
  return s;
}

}  // namespace skitrack::synth
