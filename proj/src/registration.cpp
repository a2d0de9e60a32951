#include "divetrack/registration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

namespace divetrack {

Point2 apply(const AffineTransform2D& t, Point2 p) {
  return {t.a11 * p.x + t.a12 * p.y + t.tx, t.a21 * p.x + t.a22 * p.y + t.ty};
}

AffineTransform2D compose(const AffineTransform2D& t1, const AffineTransform2D& t2) {
  AffineTransform2D r;
  r.a11 = t1.a11 * t2.a11 + t1.a12 * t2.a21;
  r.a12 = t1.a11 * t2.a12 + t1.a12 * t2.a22;
  r.a21 = t1.a21 * t2.a11 + t1.a22 * t2.a21;
  r.a22 = t1.a21 * t2.a12 + t1.a22 * t2.a22;
  r.tx = t1.a11 * t2.tx + t1.a12 * t2.ty + t1.tx;
  r.ty = t1.a21 * t2.tx + t1.a22 * t2.ty + t1.ty;
  return r;
}

AffineTransform2D invert(const AffineTransform2D& t) {
  const double d = t.det();
  if (std::abs(d) <= 1e-6) throw Singular("affine transform not invertible");
  AffineTransform2D r;
  r.a11 = t.a22 / d;
  r.a12 = -t.a12 / d;
  r.a21 = -t.a21 / d;
  r.a22 = t.a11 / d;
  r.tx = -(r.a11 * t.tx + r.a12 * t.ty);
  r.ty = -(r.a21 * t.tx + r.a22 * t.ty);
  return r;
}

std::vector<Match> match_descriptors(const std::vector<Descriptor>& a,
                                     const std::vector<Descriptor>& b,
                                     double ratio) {
  if (a.empty() || b.empty()) return {};

  struct Candidate {
    int index_a, index_b, distance;
  };
  std::vector<Candidate> cand(a.size(), {-1, -1, 0});

#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)a.size(); ++i) {
    int best = 257, second = 257, best_j = -1;
    for (int j = 0; j < int(b.size()); ++j) {
      const int d = hamming_distance(a[i], b[j]);
      if (d < best) {
        second = best;
        best = d;
        best_j = j;
      } else if (d < second) {
        second = d;
      }
    }
    bool keep;
    if (b.size() == 1)
      keep = best <= 64;  // no second neighbour: absolute fallback threshold
    else
      keep = best < ratio * second;
    cand[i] = keep ? Candidate{int(i), best_j, best} : Candidate{-1, -1, 0};
  }

  // One-to-one: per b-index keep the smallest distance, ties to smaller a.
  std::vector<int> winner(b.size(), -1);
  for (const auto& c : cand) {
    if (c.index_a < 0) continue;
    int& w = winner[c.index_b];
    if (w < 0 || c.distance < cand[w].distance) w = c.index_a;
  }
  std::vector<Match> out;
  for (const auto& c : cand)
    if (c.index_a >= 0 && winner[c.index_b] == c.index_a)
      out.push_back({c.index_a, c.index_b, c.distance});
  return out;
}

namespace {

// Solves the 3x3 system M x = rhs by Gaussian elimination with partial
// pivoting. Throws Degenerate on a (near-)singular matrix.
std::array<double, 3> solve3(std::array<std::array<double, 4>, 3> m) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (std::abs(m[pivot][col]) < 1e-12)
      throw Degenerate("collinear or insufficient correspondences");
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

struct Normalizer {
  double cx = 0.0, cy = 0.0, scale = 1.0;

  AffineTransform2D transform() const {
    return {scale, 0.0, 0.0, scale, -scale * cx, -scale * cy};
  }
};

template <typename Getter>
Normalizer fit_normalizer(const std::vector<PointPair>& pairs, Getter get) {
  Normalizer n;
  for (const auto& p : pairs) {
    n.cx += get(p).x;
    n.cy += get(p).y;
  }
  n.cx /= double(pairs.size());
  n.cy /= double(pairs.size());
  double mean_r = 0.0;
  for (const auto& p : pairs)
    mean_r += std::hypot(get(p).x - n.cx, get(p).y - n.cy);
  mean_r /= double(pairs.size());
  n.scale = mean_r > 1e-12 ? std::sqrt(2.0) / mean_r : 1.0;
  return n;
}

}  // namespace

AffineTransform2D estimate_affine_lsq(const std::vector<PointPair>& pairs) {
  if (pairs.size() < 3) throw Degenerate("need at least 3 correspondences");

  const auto ns = fit_normalizer(pairs, [](const PointPair& p) { return p.first; });
  const auto nt = fit_normalizer(pairs, [](const PointPair& p) { return p.second; });
  const auto ts = ns.transform();
  const auto tt = nt.transform();

  // Normal equations over normalized coordinates; one solve per output row.
  std::array<std::array<double, 4>, 3> mx{}, my{};
  for (const auto& pr : pairs) {
    const Point2 s = apply(ts, pr.first);
    const Point2 t = apply(tt, pr.second);
    const double u[3] = {s.x, s.y, 1.0};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        mx[r][c] += u[r] * u[c];
      }
      mx[r][3] += u[r] * t.x;
      my[r][3] += u[r] * t.y;
    }
  }
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) my[r][c] = mx[r][c];

  const auto row_x = solve3(mx);
  const auto row_y = solve3(my);
  const AffineTransform2D normalized{row_x[0], row_x[1], row_y[0],
                                     row_y[1], row_x[2], row_y[2]};
  return compose(compose(invert(tt), normalized), ts);
}

RansacResult estimate_affine_ransac(const std::vector<PointPair>& pairs, int iters,
                                    double tol, uint64_t seed) {
  const int n = int(pairs.size());
  if (n < 3) throw Degenerate("need at least 3 correspondences");

  std::mt19937_64 rng(seed);
  auto draw = [&rng, n] { return int(rng() % uint64_t(n)); };

  std::vector<int> best_inliers;
  const double tol2 = tol * tol;
  for (int it = 0; it < iters; ++it) {
    int i0 = draw(), i1 = draw(), i2 = draw();
    while (i1 == i0) i1 = draw();
    while (i2 == i0 || i2 == i1) i2 = draw();

    AffineTransform2D model;
    try {
      model = estimate_affine_lsq({pairs[i0], pairs[i1], pairs[i2]});
    } catch (const Degenerate&) {
      continue;
    }

    std::vector<int> inliers;
    for (int i = 0; i < n; ++i) {
      const Point2 m = apply(model, pairs[i].first);
      const double dx = m.x - pairs[i].second.x;
      const double dy = m.y - pairs[i].second.y;
      if (dx * dx + dy * dy <= tol2) inliers.push_back(i);
    }
    if (inliers.size() > best_inliers.size()) best_inliers = std::move(inliers);
  }

  if (best_inliers.size() < 6)
    throw NoConsensus("RANSAC found fewer than 6 inliers");

  std::vector<PointPair> subset;
  subset.reserve(best_inliers.size());
  for (int i : best_inliers) subset.push_back(pairs[i]);
  return {estimate_affine_lsq(subset), std::move(best_inliers)};
}

CameraPath chain_to_reference(const std::vector<AffineTransform2D>& pairwise,
                              int reference_index, double frame_diagonal) {
  const int n = int(pairwise.size()) + 1;
  if (reference_index < 0 || reference_index >= n)
    throw Error("reference index out of range");

  CameraPath path;
  path.reference_index = reference_index;
  path.to_global.resize(n);
  path.to_global[reference_index] = AffineTransform2D::identity();
  for (int k = reference_index + 1; k < n; ++k)
    path.to_global[k] = compose(path.to_global[k - 1], pairwise[k - 1]);
  for (int k = reference_index - 1; k >= 0; --k)
    path.to_global[k] = compose(path.to_global[k + 1], invert(pairwise[k]));

  const double t_limit = 10.0 * frame_diagonal;
  for (int k = 0; k < n; ++k) {
    const auto& t = path.to_global[k];
    if (std::abs(t.det()) <= 1e-6)
      throw Singular("composed transform singular at frame " + std::to_string(k));
    const double ad = std::abs(t.det());
    if (ad < 0.5 || ad > 2.0 || std::abs(t.tx) > t_limit || std::abs(t.ty) > t_limit)
      path.warnings.push_back("ill-conditioned transform at frame " + std::to_string(k));
  }
  return path;
}

std::vector<Point2> camera_displacement(const CameraPath& path, int frame_w, int frame_h) {
  const Point2 center{(frame_w - 1) / 2.0, (frame_h - 1) / 2.0};
  std::vector<Point2> out;
  out.reserve(path.to_global.size());
  for (const auto& t : path.to_global) {
    const Point2 p = apply(t, center);
    out.push_back({p.x - center.x, p.y - center.y});
  }
  return out;
}

}  // namespace divetrack
