#include <doctest.h>

#include <algorithm>
#include <random>

#include "divetrack/mosaic.hpp"

using namespace divetrack;

namespace {

CameraPath path_from(const std::vector<AffineTransform2D>& to_global, int ref) {
  CameraPath p;
  p.reference_index = ref;
  p.to_global = to_global;
  return p;
}

ImageBuffer ramp_image(int w, int h) {
  ImageBuffer img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      uint8_t* p = img.at(x, y);
      p[0] = p[1] = p[2] = uint8_t((x * 2) % 256);
    }
  return img;
}

}  // namespace

TEST_CASE("panorama_extent: identity and translated frames") {
  const auto single = panorama_extent(path_from({AffineTransform2D::identity()}, 0), 640, 480);
  CHECK(single.width == 640);
  CHECK(single.height == 480);
  CHECK(single.offset_x == 0.0);
  CHECK(single.offset_y == 0.0);

  const auto two = panorama_extent(
      path_from({AffineTransform2D::identity(), AffineTransform2D::translation(100, 0)}, 0),
      640, 480);
  CHECK(two.width == 740);
  CHECK(two.height == 480);
}

TEST_CASE("warp_frame: identity reproduces the frame exactly") {
  const auto img = ramp_image(40, 30);
  const auto extent = panorama_extent(path_from({AffineTransform2D::identity()}, 0), 40, 30);
  const auto rf = warp_frame(img, AffineTransform2D::identity(), extent);
  CHECK(rf.mask.count() == 40u * 30u);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) CHECK(rf.at(x, y)[0] == img.at(x, y)[0]);
}

TEST_CASE("warp_frame: half-pixel shift of a ramp averages neighbours") {
  ImageBuffer img(20, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 20; ++x) {
      uint8_t* p = img.at(x, y);
      p[0] = p[1] = p[2] = uint8_t(x * 10);
    }
  PanoramaExtent extent{30, 8, 0.0, 0.0};
  const auto rf = warp_frame(img, AffineTransform2D::translation(0.5, 0.0), extent);
  // panorama pixel px maps back to source px-0.5: mean of neighbours
  for (int x = 1; x < 20; ++x) {
    const double expect = (double(img.at(x - 1, 3)[0]) + img.at(x, 3)[0]) / 2.0;
    CHECK(rf.at(x, 3)[0] == uint8_t(std::lround(expect)));
  }
}

TEST_CASE("warp_frame: integer translation covers exactly the shifted rectangle") {
  const auto img = ramp_image(40, 30);
  PanoramaExtent extent{200, 40, 0.0, 0.0};
  const auto rf = warp_frame(img, AffineTransform2D::translation(100, 0), extent);
  CHECK(rf.mask.count() == 40u * 30u);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 200; ++x)
      CHECK(rf.mask.get(x, y) == (x >= 100 && x <= 139 && y <= 29));
}

TEST_CASE("warp_frame: out-of-extent transform writes nothing") {
  const auto img = ramp_image(10, 10);
  PanoramaExtent extent{50, 50, 0.0, 0.0};
  const auto rf = warp_frame(img, AffineTransform2D::translation(500, 500), extent);
  CHECK(rf.mask.count() == 0);
  CHECK(rf.box_w == 0);
}

TEST_CASE("composite_background: single frame passthrough") {
  const auto img = ramp_image(24, 16);
  PanoramaExtent extent{24, 16, 0.0, 0.0};
  const auto rf = warp_frame(img, AffineTransform2D::identity(), extent);
  const auto pano = composite_background({rf}, extent);
  CHECK(pano.image.pixels == img.pixels);
  for (auto c : pano.coverage) CHECK(c == 1);
  CHECK_THROWS_AS((void)composite_background({}, extent), EmptyInput);
}

TEST_CASE("median compositing removes a transient blob, keeps a persistent one") {
  PanoramaExtent extent{8, 8, 0.0, 0.0};
  auto make_frame = [&](uint8_t value_at_3_3) {
    ImageBuffer img(8, 8);
    for (auto& b : img.pixels) b = 50;
    img.at(3, 3)[0] = img.at(3, 3)[1] = img.at(3, 3)[2] = value_at_3_3;
    return warp_frame(img, AffineTransform2D::identity(), extent);
  };
  // blob present in 2 of 7 frames -> background wins
  std::vector<RegisteredFrame> frames;
  for (int k = 0; k < 7; ++k) frames.push_back(make_frame(k < 2 ? 200 : 50));
  CHECK(composite_background(frames, extent).image.at(3, 3)[0] == 50);

  // blob present in 4 of 7 frames -> blob wins (documented limitation)
  frames.clear();
  for (int k = 0; k < 7; ++k) frames.push_back(make_frame(k < 4 ? 200 : 50));
  CHECK(composite_background(frames, extent).image.at(3, 3)[0] == 200);
}

TEST_CASE("even frame count takes the lower median") {
  PanoramaExtent extent{2, 2, 0.0, 0.0};
  std::vector<RegisteredFrame> frames;
  for (uint8_t v : {10, 20, 30, 40}) {
    ImageBuffer img(2, 2);
    for (auto& b : img.pixels) b = v;
    frames.push_back(warp_frame(img, AffineTransform2D::identity(), extent));
  }
  CHECK(composite_background(frames, extent).image.at(0, 0)[0] == 20);
}

TEST_CASE("compositing is permutation invariant") {
  std::mt19937_64 rng(21);
  PanoramaExtent extent{16, 12, 0.0, 0.0};
  std::vector<RegisteredFrame> frames;
  for (int k = 0; k < 9; ++k) {
    ImageBuffer img(16, 12);
    for (auto& b : img.pixels) b = uint8_t(rng() % 256);
    frames.push_back(warp_frame(img, AffineTransform2D::identity(), extent));
  }
  const auto a = composite_background(frames, extent);
  std::shuffle(frames.begin(), frames.end(), rng);
  const auto b = composite_background(frames, extent);
  CHECK(a.image.pixels == b.image.pixels);
  CHECK(a.coverage == b.coverage);
}

TEST_CASE("zero-coverage pixels are black and flagged") {
  const auto img = ramp_image(10, 10);
  PanoramaExtent extent{30, 10, 0.0, 0.0};
  const auto rf = warp_frame(img, AffineTransform2D::identity(), extent);
  const auto pano = composite_background({rf}, extent);
  for (int x = 11; x < 30; ++x) {
    CHECK(pano.coverage[x] == 0);
    CHECK(pano.image.at(x, 0)[0] == 0);
  }
}

TEST_CASE("project_frame keeps the frame index and places the reference at the offset") {
  const auto img = ramp_image(20, 20);
  const auto path = path_from(
      {AffineTransform2D::translation(-15, 0), AffineTransform2D::identity()}, 1);
  const auto extent = panorama_extent(path, 20, 20);
  CHECK(extent.offset_x == 15.0);

  const auto rf = project_frame(1, path, extent, img);
  CHECK(rf.frame_index == 1);
  CHECK(rf.mask.get(15, 0));
  CHECK(!rf.mask.get(0, 0));
  CHECK(rf.at(15, 0)[0] == img.at(0, 0)[0]);
}
