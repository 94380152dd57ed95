#include <doctest.h>

#include <cmath>

#include "skitrack/errors.hpp"
#include "skitrack/scripted_localizer.hpp"

using namespace skitrack;

namespace {

ScriptedWorld one_frame_world(const BBox& gt, bool visible = true, double noise = 0.0) {
  ScriptedWorld w;
  w.gt = {gt, gt};
  w.visible = {visible, visible};
  w.noise_rel = noise;
  w.seed = 42;
  return w;
}

const Frame kFrame1{1, {1280, 720}, nullptr};

}  // namespace

TEST_CASE("scripted: visible and contained gives the exact box at 0.95") {
  const BBox gt{100, 100, 40, 40};
  ScriptedLocalizer loc(one_frame_world(gt));
  const auto crop = make_crop(gt, 5.0, 320, {1280, 720});
  const auto r = loc.localize({}, {}, crop, kFrame1);
  const BBox g = local_to_global(r.bbox_local, crop);
  CHECK(g.x == doctest::Approx(100.0));
  CHECK(g.y == doctest::Approx(100.0));
  CHECK(g.w == doctest::Approx(40.0));
  CHECK(g.h == doctest::Approx(40.0));
  CHECK(r.confidence == doctest::Approx(0.95));
}

TEST_CASE("scripted: confidence follows the contained fraction") {
  CropSpec crop{100, 100, 100, 320, {1280, 720}};
  ScriptedLocalizer loc(one_frame_world({120, 80, 40, 40}));
  CHECK(containment({120, 80, 40, 40}, crop) == doctest::Approx(0.75));
  CHECK(loc.localize({}, {}, crop, kFrame1).confidence == doctest::Approx(0.6 + 0.35 * 0.75));
}

TEST_CASE("scripted: lost target scores below the reattempt threshold") {
  const BBox gt{900, 300, 40, 40};
  const CropSpec far = make_crop({100, 100, 40, 40}, 5.0, 320, {1280, 720});
  ScriptedLocalizer visible(one_frame_world(gt));
  ScriptedLocalizer hidden(one_frame_world(gt, false));
  const CropSpec near = make_crop(gt, 5.0, 320, {1280, 720});
  for (const auto& [loc, crop] : {std::pair{&visible, far}, std::pair{&hidden, near}}) {
    const auto r = loc->localize({}, {}, crop, kFrame1);
    CHECK(r.confidence >= 0.0);
    CHECK(r.confidence < 0.14);
    CHECK(r.bbox_local.w <= 0.10 * 320);
    CHECK(r.bbox_local.x >= 0.0);
    CHECK(r.bbox_local.x + r.bbox_local.w <= 320.0);
  }
}

TEST_CASE("scripted: answers are a pure function of world, frame and crop") {
  ScriptedLocalizer a(one_frame_world({100, 100, 40, 40}, true, 0.05));
  ScriptedLocalizer b(one_frame_world({100, 100, 40, 40}, true, 0.05));
  const auto crop = make_crop({98, 101, 41, 39}, 5.0, 320, {1280, 720});
  const auto r1 = a.localize({}, {}, crop, kFrame1);
  const auto r2 = a.localize({}, {}, crop, kFrame1);
  const auto r3 = b.localize({}, {}, crop, kFrame1);
  CHECK(r1.bbox_local == r2.bbox_local);
  CHECK(r1.bbox_local == r3.bbox_local);
  CHECK(r1.confidence == r3.confidence);
  // Noise actually moved the box.
  CHECK_FALSE(local_to_global(r1.bbox_local, crop) == BBox{100, 100, 40, 40});
}

TEST_CASE("scripted: frames past the script are an error") {
  ScriptedLocalizer loc(one_frame_world({100, 100, 40, 40}));
  CHECK_THROWS_AS(loc.localize({}, {}, make_crop({100, 100, 40, 40}, 5, 320, {1280, 720}), Frame{5, {1280, 720}, nullptr}),
                  LocalizerUnavailable);
}

TEST_CASE("validate_result") {
  CHECK_NOTHROW(validate_result({{0, 0, 1, 1}, 0.0}));
  CHECK_NOTHROW(validate_result({{-5, 400, 1, 1}, 1.0}));
  CHECK_THROWS_AS(validate_result({{0, 0, 1, 1}, 1.3}), ProtocolViolation);
  CHECK_THROWS_AS(validate_result({{0, 0, -1, 1}, 0.5}), ProtocolViolation);
  CHECK_THROWS_AS(validate_result({{std::nan(""), 0, 1, 1}, 0.5}), ProtocolViolation);
}
