#pragma once

#include <optional>
#include <vector>

#include "divetrack/raster.hpp"
#include "divetrack/registration.hpp"

namespace divetrack {

/// Per-channel acceptance intervals in HSV space. h_low > h_high means the
/// hue interval wraps through 0 degrees.
struct HsvRange {
  double h_low = 0.0, h_high = 45.0;    // degrees in [0,360)
  double s_low = 0.15, s_high = 0.9;
  double v_low = 0.25, v_high = 1.0;
};

struct Hsv {
  double h = 0.0;  // degrees [0,360); 0 by convention when s == 0
  double s = 0.0;
  double v = 0.0;
};

Hsv rgb_to_hsv(uint8_t r, uint8_t g, uint8_t b);

bool hsv_in_range(const Hsv& c, const HsvRange& range);

/// Double-threshold color filter: a pixel passes iff h is inside the
/// (possibly wrapped) hue interval and s, v are inside their closed intervals.
BinaryMask hsv_threshold(const ImageBuffer& img, const HsvRange& range);

/// frame_mask AND NOT dilate(bg_mask, guard_dilate). The dilation absorbs
/// sub-pixel registration error.
BinaryMask subtract_background(const BinaryMask& frame_mask, const BinaryMask& bg_mask,
                               int guard_dilate = 2);

struct Component {
  std::vector<int> pixels;  // linear indices, row-major
  long long area = 0;
  Point2 centroid;
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

/// 8-connectivity labeling; components ordered by first pixel in row-major scan.
std::vector<Component> connected_components(const BinaryMask& mask);

/// Drops components smaller than min_area and picks the largest survivor.
/// Area ties go to the centroid nearest `previous`, then to scan order.
const Component& select_subject(const std::vector<Component>& components,
                                long long min_area,
                                const std::optional<Point2>& previous);

Point2 barycenter(const Component& c);

}  // namespace divetrack
