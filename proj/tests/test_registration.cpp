#include <doctest.h>

#include <cmath>
#include <random>

#include "divetrack/registration.hpp"

using namespace divetrack;

namespace {

Descriptor random_descriptor(std::mt19937_64& rng, int index) {
  Descriptor d;
  for (auto& w : d.bits) w = rng();
  d.keypoint_index = index;
  return d;
}

AffineTransform2D random_affine(std::mt19937_64& rng) {
  auto u = [&rng](double lo, double hi) {
    return lo + (hi - lo) * double(rng() % 100000) / 100000.0;
  };
  AffineTransform2D t;
  do {
    t = {u(0.7, 1.3), u(-0.3, 0.3), u(-0.3, 0.3), u(0.7, 1.3), u(-50, 50), u(-50, 50)};
  } while (std::abs(t.det()) < 0.2);
  return t;
}

// Unnormalized normal-equations fit, as an independent oracle.
AffineTransform2D lsq_oracle(const std::vector<PointPair>& pairs) {
  double m[3][3] = {};
  double rx[3] = {}, ry[3] = {};
  for (const auto& p : pairs) {
    const double u[3] = {p.first.x, p.first.y, 1.0};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += u[r] * u[c];
      rx[r] += u[r] * p.second.x;
      ry[r] += u[r] * p.second.y;
    }
  }
  // Cramer's rule
  auto det3 = [](const double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  const double d = det3(m);
  auto solve = [&](const double rhs[3], double out[3]) {
    for (int col = 0; col < 3; ++col) {
      double mm[3][3];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) mm[r][c] = c == col ? rhs[r] : m[r][c];
      out[col] = det3(mm) / d;
    }
  };
  double row_x[3], row_y[3];
  solve(rx, row_x);
  solve(ry, row_y);
  return {row_x[0], row_x[1], row_y[0], row_y[1], row_x[2], row_y[2]};
}

double residual_sum(const AffineTransform2D& t, const std::vector<PointPair>& pairs) {
  double acc = 0.0;
  for (const auto& p : pairs) {
    const Point2 m = apply(t, p.first);
    acc += (m.x - p.second.x) * (m.x - p.second.x) +
           (m.y - p.second.y) * (m.y - p.second.y);
  }
  return acc;
}

}  // namespace

TEST_CASE("match_descriptors: identity matching at ratio 1.0") {
  std::mt19937_64 rng(1);
  std::vector<Descriptor> a;
  for (int i = 0; i < 20; ++i) a.push_back(random_descriptor(rng, i));
  const auto matches = match_descriptors(a, a, 1.0);
  REQUIRE(matches.size() == 20);
  for (const auto& m : matches) {
    CHECK(m.index_a == m.index_b);
    CHECK(m.distance == 0);
  }
}

TEST_CASE("match_descriptors: singleton candidate uses the 64-bit fallback") {
  Descriptor x{};  // all zero
  Descriptor close{};
  close.bits[0] = 0xFFull;  // distance 8
  Descriptor far{};
  far.bits[0] = ~0ull;
  far.bits[1] = ~0ull;  // distance 128

  CHECK(match_descriptors({x}, {close}, 0.8).size() == 1);
  CHECK(match_descriptors({x}, {far}, 0.8).empty());
}

TEST_CASE("match_descriptors: random vs random survives rarely") {
  std::mt19937_64 rng(2);
  std::vector<Descriptor> a, b;
  for (int i = 0; i < 100; ++i) a.push_back(random_descriptor(rng, i));
  for (int i = 0; i < 100; ++i) b.push_back(random_descriptor(rng, i));
  CHECK(match_descriptors(a, b, 0.8).size() < 5);
}

TEST_CASE("match_descriptors: empty inputs") {
  CHECK(match_descriptors({}, {}, 0.8).empty());
}

TEST_CASE("estimate_affine_lsq recovers an exact map from 3 points") {
  const AffineTransform2D truth{1.1, 0.2, -0.1, 0.9, 5.0, -3.0};
  std::vector<PointPair> pairs;
  for (const auto& s : {Point2{0, 0}, Point2{10, 2}, Point2{3, 8}})
    pairs.push_back({s, apply(truth, s)});
  const auto fit = estimate_affine_lsq(pairs);
  CHECK(std::abs(fit.a11 - truth.a11) < 1e-9);
  CHECK(std::abs(fit.a12 - truth.a12) < 1e-9);
  CHECK(std::abs(fit.a21 - truth.a21) < 1e-9);
  CHECK(std::abs(fit.a22 - truth.a22) < 1e-9);
  CHECK(std::abs(fit.tx - truth.tx) < 1e-9);
  CHECK(std::abs(fit.ty - truth.ty) < 1e-9);
}

TEST_CASE("estimate_affine_lsq: identity correspondences give identity") {
  std::vector<PointPair> pairs = {{{1, 1}, {1, 1}}, {{4, 2}, {4, 2}}, {{2, 7}, {2, 7}},
                                  {{9, 9}, {9, 9}}};
  const auto fit = estimate_affine_lsq(pairs);
  CHECK(std::abs(fit.a11 - 1) < 1e-9);
  CHECK(std::abs(fit.a22 - 1) < 1e-9);
  CHECK(std::abs(fit.a12) < 1e-9);
  CHECK(std::abs(fit.tx) < 1e-9);
}

TEST_CASE("estimate_affine_lsq degenerate inputs") {
  CHECK_THROWS_AS((void)estimate_affine_lsq({{{0, 0}, {1, 1}}, {{1, 1}, {2, 2}}}),
                  Degenerate);
  // collinear source points
  std::vector<PointPair> collinear = {
      {{0, 0}, {0, 0}}, {{1, 1}, {2, 1}}, {{2, 2}, {4, 2}}, {{3, 3}, {6, 3}}};
  CHECK_THROWS_AS((void)estimate_affine_lsq(collinear), Degenerate);
}

TEST_CASE("noisy LSQ matches the normal-equations oracle") {
  std::mt19937_64 rng(3);
  const AffineTransform2D truth{0.95, 0.1, -0.05, 1.05, 20.0, -8.0};
  std::normal_distribution<double> noise(0.0, 0.5);
  std::vector<PointPair> pairs;
  for (int i = 0; i < 50; ++i) {
    const Point2 s{double(rng() % 200), double(rng() % 150)};
    Point2 t = apply(truth, s);
    t.x += noise(rng);
    t.y += noise(rng);
    pairs.push_back({s, t});
  }
  const auto fit = estimate_affine_lsq(pairs);
  const auto oracle = lsq_oracle(pairs);
  CHECK(std::abs(residual_sum(fit, pairs) - residual_sum(oracle, pairs)) < 1e-6);
}

TEST_CASE("LSQ is exact on noise-free random affine maps") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 25; ++trial) {
    const auto truth = random_affine(rng);
    std::vector<PointPair> pairs;
    for (int i = 0; i < 12; ++i) {
      const Point2 s{double(rng() % 300), double(rng() % 200)};
      pairs.push_back({s, apply(truth, s)});
    }
    const auto fit = estimate_affine_lsq(pairs);
    for (const auto& p : pairs) {
      const Point2 m = apply(fit, p.first);
      CHECK(std::abs(m.x - p.second.x) < 1e-7);
      CHECK(std::abs(m.y - p.second.y) < 1e-7);
    }
  }
}

TEST_CASE("translating inputs changes only the translation part") {
  std::mt19937_64 rng(5);
  std::vector<PointPair> pairs;
  const AffineTransform2D truth{1.05, -0.1, 0.2, 0.9, 3.0, 4.0};
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int i = 0; i < 30; ++i) {
    const Point2 s{double(rng() % 100), double(rng() % 100)};
    Point2 t = apply(truth, s);
    t.x += noise(rng);
    t.y += noise(rng);
    pairs.push_back({s, t});
  }
  auto shifted = pairs;
  for (auto& p : shifted) {
    p.first.x += 137.0;
    p.first.y -= 29.0;
  }
  const auto a = estimate_affine_lsq(pairs);
  const auto b = estimate_affine_lsq(shifted);
  CHECK(std::abs(a.a11 - b.a11) < 1e-9);
  CHECK(std::abs(a.a12 - b.a12) < 1e-9);
  CHECK(std::abs(a.a21 - b.a21) < 1e-9);
  CHECK(std::abs(a.a22 - b.a22) < 1e-9);
}

TEST_CASE("RANSAC rejects outliers and is deterministic") {
  std::mt19937_64 rng(6);
  const AffineTransform2D truth{1.0, 0.05, -0.05, 1.0, 12.0, -7.0};
  std::vector<PointPair> pairs;
  for (int i = 0; i < 70; ++i) {
    const Point2 s{double(rng() % 400), double(rng() % 300)};
    pairs.push_back({s, apply(truth, s)});
  }
  for (int i = 0; i < 30; ++i)
    pairs.push_back({{double(rng() % 400), double(rng() % 300)},
                     {double(rng() % 400), double(rng() % 300)}});

  const auto res = estimate_affine_ransac(pairs, 500, 2.0, 123);
  CHECK(res.inliers.size() >= 70);
  double err = 0.0;
  for (int i = 0; i < 70; ++i) {
    const Point2 m = apply(res.transform, pairs[i].first);
    err += std::hypot(m.x - pairs[i].second.x, m.y - pairs[i].second.y);
  }
  CHECK(err / 70.0 <= 0.5);

  const auto res2 = estimate_affine_ransac(pairs, 500, 2.0, 123);
  CHECK(res2.inliers == res.inliers);
  CHECK(res2.transform.tx == res.transform.tx);
  CHECK(res2.transform.a11 == res.transform.a11);
}

TEST_CASE("RANSAC: all-exact pairs are all inliers; tiny sets fail") {
  const AffineTransform2D truth{1.0, 0.0, 0.0, 1.0, 4.0, 4.0};
  std::vector<PointPair> pairs;
  for (int i = 0; i < 10; ++i) {
    const Point2 s{double(i * 7 % 23), double(i * 13 % 17)};
    pairs.push_back({s, apply(truth, s)});
  }
  const auto res = estimate_affine_ransac(pairs);
  CHECK(res.inliers.size() == pairs.size());

  std::vector<PointPair> five(pairs.begin(), pairs.begin() + 5);
  CHECK_THROWS_AS((void)estimate_affine_ransac(five), NoConsensus);
}

TEST_CASE("compose, invert, apply basics") {
  std::mt19937_64 rng(7);
  const auto t = random_affine(rng);
  const auto round = compose(t, invert(t));
  CHECK(std::abs(round.a11 - 1) < 1e-9);
  CHECK(std::abs(round.a12) < 1e-9);
  CHECK(std::abs(round.a21) < 1e-9);
  CHECK(std::abs(round.a22 - 1) < 1e-9);
  CHECK(std::abs(round.tx) < 1e-9);
  CHECK(std::abs(round.ty) < 1e-9);

  const auto sum = compose(AffineTransform2D::translation(3, 0),
                           AffineTransform2D::translation(4, 0));
  CHECK(sum.tx == doctest::Approx(7.0));
  CHECK(sum.ty == doctest::Approx(0.0));

  const Point2 p{3.5, -1.25};
  const Point2 q = apply(AffineTransform2D::identity(), p);
  CHECK(q.x == p.x);
  CHECK(q.y == p.y);

  AffineTransform2D singular{1, 1, 1, 1, 0, 0};
  CHECK_THROWS_AS((void)invert(singular), Singular);
}

TEST_CASE("chain_to_reference: translations accumulate; middle reference halves extremes") {
  std::vector<AffineTransform2D> pairwise(8);
  // pairwise[i]: frame i+1 -> frame i is a +10 px shift
  for (auto& t : pairwise) t = AffineTransform2D::translation(10, 0);

  const auto from_zero = chain_to_reference(pairwise, 0, 800.0);
  CHECK(std::abs(from_zero.to_global[0].tx) < 1e-12);
  for (int k = 0; k <= 8; ++k)
    CHECK(from_zero.to_global[k].tx == doctest::Approx(10.0 * k));

  const auto from_mid = chain_to_reference(pairwise, 4, 800.0);
  CHECK(std::abs(from_mid.to_global[4].tx) < 1e-9);
  double max_zero = 0, max_mid = 0;
  for (int k = 0; k <= 8; ++k) {
    max_zero = std::max(max_zero, std::abs(from_zero.to_global[k].tx));
    max_mid = std::max(max_mid, std::abs(from_mid.to_global[k].tx));
  }
  CHECK(max_mid == doctest::Approx(max_zero / 2.0));
}

TEST_CASE("chain_to_reference warns on ill-conditioned transforms") {
  std::vector<AffineTransform2D> pairwise(3);
  for (auto& t : pairwise) t = {1.5, 0, 0, 1.5, 0, 0};  // det 2.25 per step
  const auto path = chain_to_reference(pairwise, 0, 100.0);
  CHECK(!path.warnings.empty());
}

TEST_CASE("re-chaining from a different reference is consistent") {
  std::mt19937_64 rng(8);
  std::vector<AffineTransform2D> pairwise;
  for (int i = 0; i < 6; ++i) {
    AffineTransform2D t = AffineTransform2D::translation(
        double(rng() % 21) - 10.0, double(rng() % 21) - 10.0);
    t.a11 = 1.0 + (double(rng() % 100) - 50.0) / 2000.0;
    pairwise.push_back(t);
  }
  const auto path_a = chain_to_reference(pairwise, 2, 800.0);
  const auto path_b = chain_to_reference(pairwise, 5, 800.0);
  // to_global_a[k] == change_of_frame o to_global_b[k] for a fixed transform
  const auto change = compose(path_a.to_global[5], invert(path_b.to_global[5]));
  for (size_t k = 0; k < path_a.to_global.size(); ++k) {
    const auto recon = compose(change, path_b.to_global[k]);
    CHECK(std::abs(recon.tx - path_a.to_global[k].tx) < 1e-6);
    CHECK(std::abs(recon.a11 - path_a.to_global[k].a11) < 1e-9);
  }
}

TEST_CASE("camera_displacement") {
  std::vector<AffineTransform2D> identities(4);
  const auto static_path = chain_to_reference(identities, 0, 800.0);
  for (const auto& d : camera_displacement(static_path, 640, 480)) {
    CHECK(d.x == doctest::Approx(0.0));
    CHECK(d.y == doctest::Approx(0.0));
  }

  std::vector<AffineTransform2D> shifts(4);
  for (auto& t : shifts) t = AffineTransform2D::translation(10, 0);
  const auto path = chain_to_reference(shifts, 0, 800.0);
  const auto disp = camera_displacement(path, 640, 480);
  for (int k = 0; k <= 4; ++k) CHECK(disp[k].x == doctest::Approx(10.0 * k));
}
