#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "divetrack/features.hpp"

namespace divetrack {

struct Match {
  int index_a = -1;
  int index_b = -1;
  int distance = 0;  // Hamming bits, [0,256]
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// 6-parameter planar map: (x,y) -> (a11 x + a12 y + tx, a21 x + a22 y + ty).
struct AffineTransform2D {
  double a11 = 1.0, a12 = 0.0;
  double a21 = 0.0, a22 = 1.0;
  double tx = 0.0, ty = 0.0;

  double det() const { return a11 * a22 - a12 * a21; }
  static AffineTransform2D identity() { return {}; }
  static AffineTransform2D translation(double dx, double dy) {
    return {1, 0, 0, 1, dx, dy};
  }
};

Point2 apply(const AffineTransform2D& t, Point2 p);
/// compose(t1, t2): applies t2 first, then t1.
AffineTransform2D compose(const AffineTransform2D& t1, const AffineTransform2D& t2);
/// Exact inverse via the 2x2 linear part. Throws Singular when |det| <= 1e-6.
AffineTransform2D invert(const AffineTransform2D& t);

struct CameraPath {
  int reference_index = 0;
  std::vector<AffineTransform2D> to_global;  // frame coords -> reference coords
  std::vector<std::string> warnings;
};

/// Ratio-test matching on Hamming distance, then one-to-one filtering (per
/// b-index keep the smallest distance, ties to the smaller a-index). When b
/// has a single descriptor the ratio test degenerates to d1 <= 64.
std::vector<Match> match_descriptors(const std::vector<Descriptor>& a,
                                     const std::vector<Descriptor>& b,
                                     double ratio = 0.8);

using PointPair = std::pair<Point2, Point2>;  // (source, target)

/// Least-squares affine fit with Hartley-style normalization. Throws
/// Degenerate for fewer than 3 pairs or a collinear source set.
AffineTransform2D estimate_affine_lsq(const std::vector<PointPair>& pairs);

struct RansacResult {
  AffineTransform2D transform;
  std::vector<int> inliers;
};

/// Seeded RANSAC over minimal 3-point samples, consensus by reprojection
/// distance <= tol, refined by LSQ over all inliers. Needs >= 6 inliers.
RansacResult estimate_affine_ransac(const std::vector<PointPair>& pairs,
                                    int iters = 500, double tol = 2.0,
                                    uint64_t seed = 1);

/// Chains pairwise transforms (pairwise[i]: frame i+1 coords -> frame i
/// coords) into per-frame maps onto the reference frame. frame_diagonal is
/// used for the conditioning warning threshold.
CameraPath chain_to_reference(const std::vector<AffineTransform2D>& pairwise,
                              int reference_index, double frame_diagonal);

/// Per frame: image of the frame centre under to_global, minus the reference
/// frame centre.
std::vector<Point2> camera_displacement(const CameraPath& path, int frame_w, int frame_h);

}  // namespace divetrack
