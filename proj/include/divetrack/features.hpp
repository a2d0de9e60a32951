#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "divetrack/raster.hpp"

namespace divetrack {

enum class DetectorKind { Fast, Harris, Doh };

DetectorKind detector_from_string(const std::string& name);
std::string to_string(DetectorKind kind);

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double response = 0.0;
  double scale = 1.2;  // scale-less detectors report 1.2
  DetectorKind detector = DetectorKind::Fast;
};

/// 256-bit binary descriptor, 4 x 64-bit words.
struct Descriptor {
  std::array<uint64_t, 4> bits{};
  int keypoint_index = -1;
};

int hamming_distance(const Descriptor& a, const Descriptor& b);

/// FAST-9 segment test on the 16-pixel Bresenham circle of radius 3, with 3x3
/// non-maximum suppression on the arc-contrast response. threshold is a
/// luminance delta in (0,1). Border of 3 px excluded.
std::vector<Keypoint> detect_fast(const GrayImage& img, double threshold);

/// Harris corners: central-difference gradients, structure tensor smoothed
/// with a 5x5 Gaussian (sigma 1), R = det - k*trace^2, 3x3 local maxima with
/// R >= rel_threshold * max(R).
std::vector<Keypoint> detect_harris(const GrayImage& img, double k = 0.04,
                                    double rel_threshold = 0.01);

/// Determinant-of-Hessian blob detector on integral-image box filters at
/// sizes {9,15,21,27}, 3x3x3 non-max suppression across space and scale.
/// Reported scale is 1.2 * size / 9.
std::vector<Keypoint> detect_doh(const GrayImage& img, double threshold);

struct DescribeResult {
  std::vector<Descriptor> descriptors;
  std::vector<int> dropped;  // keypoint indices without a full 31x31 patch
};

/// BRIEF-style descriptors: 256 pairwise comparisons of the 5x5-box-smoothed
/// patch, pattern fixed by PRNG seed 0x5EED (identical across runs/platforms).
DescribeResult describe(const GrayImage& img, const std::vector<Keypoint>& kps);

/// Keeps the n strongest keypoints (ties by position) and restores
/// row-major order.
std::vector<Keypoint> strongest(std::vector<Keypoint> kps, size_t n);

std::vector<Keypoint> detect(const GrayImage& img, DetectorKind kind,
                             double fast_threshold, double harris_k,
                             double harris_rel_threshold, double doh_threshold);

}  // namespace divetrack
