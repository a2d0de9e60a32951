#pragma once

#include "divetrack/features.hpp"
#include "divetrack/mosaic.hpp"
#include "divetrack/segmentation.hpp"

// Serial reference implementations of the OpenMP kernels. Written as the
// plainest possible loops; the tests assert the parallel kernels match them
// exactly, and bench_kernels compares their throughput.
namespace divetrack::reference {

GrayImage to_grayscale(const ImageBuffer& img);

BinaryMask hsv_threshold(const ImageBuffer& img, const HsvRange& range);

RegisteredFrame warp_frame(const ImageBuffer& frame, const AffineTransform2D& t,
                           const PanoramaExtent& extent);

Panorama composite_background(const std::vector<RegisteredFrame>& frames,
                              const PanoramaExtent& extent);

std::vector<Keypoint> detect_harris(const GrayImage& img, double k = 0.04,
                                    double rel_threshold = 0.01);

std::vector<Match> match_descriptors(const std::vector<Descriptor>& a,
                                     const std::vector<Descriptor>& b,
                                     double ratio = 0.8);

BinaryMask dilate(const BinaryMask& mask, int iterations);

}  // namespace divetrack::reference
