#pragma once

#include <vector>

#include "divetrack/raster.hpp"
#include "divetrack/registration.hpp"

namespace divetrack {

/// Integer panorama geometry. origin_offset translates reference-frame
/// coordinates into panorama pixel coordinates.
struct PanoramaExtent {
  int width = 0;
  int height = 0;
  double offset_x = 0.0;
  double offset_y = 0.0;
};

struct Panorama {
  ImageBuffer image;
  double offset_x = 0.0;
  double offset_y = 0.0;
  std::vector<uint16_t> coverage;  // contributing-frame count per pixel
};

/// A frame warped into panorama coordinates. Pixels are stored only for the
/// written bounding box; `mask` (full extent) is true exactly where written.
struct RegisteredFrame {
  int frame_index = -1;
  int x0 = 0, y0 = 0;        // bounding box origin in panorama coords
  int box_w = 0, box_h = 0;  // bounding box size (0 when nothing written)
  std::vector<uint8_t> pixels;  // box_w*box_h*3, valid where mask is set
  BinaryMask mask;              // full panorama extent

  const uint8_t* at(int px, int py) const {
    return &pixels[(size_t(py - y0) * box_w + (px - x0)) * 3];
  }
};

/// Axis-aligned bounding box of all frame corners mapped through to_global,
/// rounded outward to integers.
PanoramaExtent panorama_extent(const CameraPath& path, int frame_w, int frame_h);

/// Inverse-maps every panorama pixel through t with bilinear sampling.
/// Pixels mapping outside the source stay unwritten.
RegisteredFrame warp_frame(const ImageBuffer& frame, const AffineTransform2D& t,
                           const PanoramaExtent& extent);

/// Per-pixel, per-channel median over contributing frames (even count ->
/// lower median). Zero-coverage pixels stay black.
Panorama composite_background(const std::vector<RegisteredFrame>& frames,
                              const PanoramaExtent& extent);

RegisteredFrame project_frame(int frame_index, const CameraPath& path,
                              const PanoramaExtent& extent, const ImageBuffer& frame);

}  // namespace divetrack
