#include <doctest.h>

#include <cmath>

#include "divetrack/segmentation.hpp"
#include "divetrack/synth.hpp"

using namespace divetrack;

namespace {

SceneSpec small_spec(int n_frames, bool subject) {
  SceneSpec spec;
  spec.background_w = 400;
  spec.background_h = 300;
  spec.frame_w = 160;
  spec.frame_h = 120;
  spec.subject_enabled = subject;
  spec.subject_x0 = 120.0;
  spec.subject_y0 = 95.0;
  spec.subject_vx = 30.0;
  spec.subject_vy = 40.0;
  for (int k = 0; k < n_frames; ++k) spec.camera_path.push_back({50.0 + 2.0 * k, 60.0});
  return spec;
}

}  // namespace

TEST_CASE("generate is bit-deterministic and sized by its SceneSpec") {
  const auto spec = small_spec(5, true);
  const auto a = generate(spec);
  const auto b = generate(spec);
  REQUIRE(a.frames.frames.size() == 5);
  CHECK(a.truth_path.size() == 5);
  CHECK(a.truth_trajectory.size() == 5);
  CHECK(a.frames.frames[0].width == 160);
  CHECK(a.frames.frames[0].height == 120);
  CHECK(a.background.width == 400);
  for (size_t k = 0; k < 5; ++k) CHECK(a.frames.frames[k].pixels == b.frames.frames[k].pixels);
}

TEST_CASE("integer camera offsets crop the background exactly") {
  auto spec = small_spec(3, false);
  const auto scene = generate(spec);
  for (int k = 0; k < 3; ++k) {
    const int ox = int(scene.truth_path[k].x), oy = int(scene.truth_path[k].y);
    for (int y = 0; y < spec.frame_h; y += 7)
      for (int x = 0; x < spec.frame_w; x += 7)
        CHECK(scene.frames.frames[k].at(x, y)[0] == scene.background.at(x + ox, y + oy)[0]);
  }
}

TEST_CASE("texture changes with the seed but not with the subject") {
  auto spec = small_spec(2, false);
  auto other = spec;
  other.texture_seed = 8;
  CHECK(generate(spec).background.pixels != generate(other).background.pixels);

  auto with_subject = spec;
  with_subject.subject_enabled = true;
  CHECK(generate(spec).background.pixels == generate(with_subject).background.pixels);
}

TEST_CASE("subject color passes the default skin range, texture does not") {
  HsvRange range;
  const auto clean = generate(small_spec(4, false));
  for (const auto& frame : clean.frames.frames) CHECK(hsv_threshold(frame, range).count() == 0);

  const auto scene = generate(small_spec(4, true));
  for (int k = 0; k < 4; ++k) {
    const auto mask = hsv_threshold(scene.frames.frames[k], range);
    // full ellipse area is pi * 14 * 22 ~ 967; it may be partly off-frame
    CHECK(mask.count() > 300);

    // mask barycentre lands on the true subject centre (frame coords)
    const auto comps = connected_components(mask);
    const auto& subject = select_subject(comps, 50, std::nullopt);
    const double ex = scene.truth_trajectory[k].x - scene.truth_path[k].x;
    const double ey = scene.truth_trajectory[k].y - scene.truth_path[k].y;
    CHECK(std::abs(subject.centroid.x - ex) < 1.0);
    CHECK(std::abs(subject.centroid.y - ey) < 1.0);
  }
}

TEST_CASE("truth trajectory follows the ballistic arc") {
  auto spec = small_spec(6, true);
  spec.gravity = 50.0;
  const auto scene = generate(spec);
  for (int k = 0; k < 6; ++k) {
    const double t = k / spec.fps;
    CHECK(scene.truth_trajectory[k].x ==
          doctest::Approx(spec.subject_x0 + spec.subject_vx * t));
    CHECK(scene.truth_trajectory[k].y ==
          doctest::Approx(spec.subject_y0 + spec.subject_vy * t + 0.5 * spec.gravity * t * t));
  }
  CHECK(scene.frames.timestamps[2] == doctest::Approx(0.1));
}

TEST_CASE("camera windows outside the background are rejected") {
  auto spec = small_spec(2, false);
  spec.camera_path[1] = {300.0, 60.0};  // 300 + 160 > 400
  CHECK_THROWS_AS((void)generate(spec), SpecOutOfBounds);

  auto neg = small_spec(2, false);
  neg.camera_path[0] = {-1.0, 0.0};
  CHECK_THROWS_AS((void)generate(neg), SpecOutOfBounds);

  SceneSpec empty;
  CHECK_THROWS_AS((void)generate(empty), SpecOutOfBounds);
}

TEST_CASE("score_path aligns at the reference index") {
  std::vector<Point2> truth = {{0, 0}, {10, 0}, {20, 5}};
  CHECK(score_path(truth, truth, 0) == doctest::Approx(0.0));

  // a constant offset vanishes after alignment
  std::vector<Point2> shifted = {{7, -3}, {17, -3}, {27, 2}};
  CHECK(score_path(shifted, truth, 1) == doctest::Approx(0.0));

  // 3 px error on one of three frames: rmse = 3 / sqrt(3)
  std::vector<Point2> off = {{0, 0}, {10, 0}, {23, 5}};
  CHECK(score_path(off, truth, 0) == doctest::Approx(3.0 / std::sqrt(3.0)));
}

TEST_CASE("score_traj is a plain rmse and checks lengths") {
  std::vector<Point2> a = {{0, 0}, {3, 4}};
  std::vector<Point2> b = {{0, 0}, {0, 0}};
  CHECK(score_traj(a, a) == doctest::Approx(0.0));
  CHECK(score_traj(a, b) == doctest::Approx(5.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS((void)score_traj(a, {{0, 0}}), LengthMismatch);
}

TEST_CASE("rgb_from_hsv hits exact corners") {
  uint8_t rgb[3];
  rgb_from_hsv(Hsv{0.0, 0.0, 1.0}, rgb);
  CHECK(rgb[0] == 255);
  CHECK(rgb[1] == 255);
  CHECK(rgb[2] == 255);

  rgb_from_hsv(Hsv{240.0, 1.0, 1.0}, rgb);
  CHECK(rgb[0] == 0);
  CHECK(rgb[1] == 0);
  CHECK(rgb[2] == 255);

  rgb_from_hsv(Hsv{20.0, 0.5, 0.8}, rgb);
  CHECK(rgb[0] == 204);
  CHECK(rgb[1] == 136);
  CHECK(rgb[2] == 102);
}
