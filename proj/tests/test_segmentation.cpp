#include <doctest.h>

#include <cmath>

#include "divetrack/segmentation.hpp"
#include "divetrack/synth.hpp"

using namespace divetrack;

namespace {

ImageBuffer solid(int w, int h, uint8_t r, uint8_t g, uint8_t b) {
  ImageBuffer img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      uint8_t* p = img.at(x, y);
      p[0] = r;
      p[1] = g;
      p[2] = b;
    }
  return img;
}

BinaryMask mask_from(int w, int h, std::initializer_list<std::pair<int, int>> on) {
  BinaryMask m(w, h);
  for (auto [x, y] : on) m.set(x, y, true);
  return m;
}

}  // namespace

TEST_CASE("rgb_to_hsv on primaries and greys") {
  auto red = rgb_to_hsv(255, 0, 0);
  CHECK(red.h == doctest::Approx(0.0));
  CHECK(red.s == doctest::Approx(1.0));
  CHECK(red.v == doctest::Approx(1.0));

  auto green = rgb_to_hsv(0, 255, 0);
  CHECK(green.h == doctest::Approx(120.0));

  auto blue = rgb_to_hsv(0, 0, 255);
  CHECK(blue.h == doctest::Approx(240.0));

  auto grey = rgb_to_hsv(128, 128, 128);
  CHECK(grey.h == 0.0);  // convention for s == 0
  CHECK(grey.s == 0.0);
  CHECK(grey.v == doctest::Approx(128.0 / 255.0));

  auto orange = rgb_to_hsv(255, 128, 0);
  CHECK(orange.h == doctest::Approx(360.0 * 128 / (255.0 * 6)).epsilon(1e-6));
}

TEST_CASE("hsv round-trips through rgb_from_hsv") {
  for (double h : {0.0, 20.0, 119.0, 240.0, 350.0})
    for (double s : {0.3, 0.8})
      for (double v : {0.4, 0.95}) {
        uint8_t rgb[3];
        rgb_from_hsv(Hsv{h, s, v}, rgb);
        auto back = rgb_to_hsv(rgb[0], rgb[1], rgb[2]);
        CHECK(std::abs(back.h - h) < 2.0);
        CHECK(std::abs(back.s - s) < 0.02);
        CHECK(std::abs(back.v - v) < 0.01);
      }
}

TEST_CASE("hsv_in_range handles wrapped hue intervals") {
  HsvRange wrap;
  wrap.h_low = 350.0;
  wrap.h_high = 10.0;
  CHECK(hsv_in_range(Hsv{355.0, 0.5, 0.5}, wrap));
  CHECK(hsv_in_range(Hsv{5.0, 0.5, 0.5}, wrap));
  CHECK(!hsv_in_range(Hsv{180.0, 0.5, 0.5}, wrap));

  HsvRange plain;  // defaults: 0..45
  CHECK(hsv_in_range(Hsv{20.0, 0.5, 0.8}, plain));
  CHECK(!hsv_in_range(Hsv{46.0, 0.5, 0.8}, plain));
  CHECK(!hsv_in_range(Hsv{20.0, 0.05, 0.8}, plain));  // s below
  CHECK(!hsv_in_range(Hsv{20.0, 0.5, 0.1}, plain));   // v below
}

TEST_CASE("hsv_threshold picks the subject color, rejects the water color") {
  HsvRange range;
  uint8_t skin[3], water[3];
  rgb_from_hsv(Hsv{20.0, 0.5, 0.8}, skin);
  rgb_from_hsv(Hsv{210.0, 0.7, 0.5}, water);

  auto img = solid(6, 4, water[0], water[1], water[2]);
  uint8_t* p = img.at(2, 1);
  p[0] = skin[0];
  p[1] = skin[1];
  p[2] = skin[2];

  auto m = hsv_threshold(img, range);
  CHECK(m.count() == 1);
  CHECK(m.get(2, 1));
}

TEST_CASE("subtract_background removes the guard band around background hits") {
  auto frame = mask_from(9, 9, {{1, 1}, {4, 4}, {8, 8}});
  auto bg = mask_from(9, 9, {{8, 8}, {2, 2}});
  auto out = subtract_background(frame, bg, 1);
  // (8,8) is a background pixel; (1,1) falls in the dilated guard of (2,2)
  CHECK(out.count() == 1);
  CHECK(out.get(4, 4));

  // guard 0 keeps (1,1)
  auto strict = subtract_background(frame, bg, 0);
  CHECK(strict.count() == 2);
  CHECK(strict.get(1, 1));
}

TEST_CASE("connected_components: 8-connectivity, ordering, geometry") {
  // two blobs; diagonal pixels join under 8-connectivity
  auto m = mask_from(10, 6, {{1, 1}, {2, 2}, {2, 1}, {7, 4}, {8, 4}});
  auto comps = connected_components(m);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].area == 3);  // first in scan order
  CHECK(comps[0].min_x == 1);
  CHECK(comps[0].max_x == 2);
  CHECK(comps[0].min_y == 1);
  CHECK(comps[0].max_y == 2);
  CHECK(comps[1].area == 2);
  CHECK(comps[1].centroid.x == doctest::Approx(7.5));
  CHECK(comps[1].centroid.y == doctest::Approx(4.0));

  CHECK(connected_components(BinaryMask(5, 5)).empty());
}

TEST_CASE("component centroid matches barycenter") {
  auto m = mask_from(6, 6, {{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  auto comps = connected_components(m);
  REQUIRE(comps.size() == 1);
  auto c = barycenter(comps[0]);
  CHECK(c.x == doctest::Approx(0.5));
  CHECK(c.y == doctest::Approx(0.5));
}

TEST_CASE("select_subject: min_area filter, largest wins, ties prefer previous") {
  auto m = mask_from(20, 8,
                     {{1, 1},                                      // area 1
                      {5, 2}, {6, 2}, {5, 3}, {6, 3},              // area 4, centroid (5.5, 2.5)
                      {15, 5}, {16, 5}, {15, 6}, {16, 6}});        // area 4, centroid (15.5, 5.5)
  auto comps = connected_components(m);
  REQUIRE(comps.size() == 3);

  // min_area drops the singleton; tie between the 4-pixel blobs goes to the
  // one nearest the previous barycentre
  const auto& near_right = select_subject(comps, 2, Point2{16.0, 5.0});
  CHECK(near_right.centroid.x == doctest::Approx(15.5));

  const auto& near_left = select_subject(comps, 2, Point2{4.0, 2.0});
  CHECK(near_left.centroid.x == doctest::Approx(5.5));

  // no previous: scan order breaks the tie
  const auto& first = select_subject(comps, 2, std::nullopt);
  CHECK(first.centroid.x == doctest::Approx(5.5));

  // strictly larger component beats proximity
  auto m2 = mask_from(20, 8, {{1, 1}, {2, 1}, {1, 2}, {2, 2}, {10, 1}, {11, 1}});
  auto comps2 = connected_components(m2);
  const auto& big = select_subject(comps2, 1, Point2{10.5, 1.0});
  CHECK(big.area == 4);

  CHECK_THROWS_AS((void)select_subject(comps, 100, std::nullopt), NoSubject);
  CHECK_THROWS_AS((void)select_subject({}, 1, std::nullopt), NoSubject);
}
