#include "divetrack/mosaic.hpp"

#include <algorithm>
#include <cmath>

namespace divetrack {

PanoramaExtent panorama_extent(const CameraPath& path, int frame_w, int frame_h) {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool first = true;
  const double corners[4][2] = {{0, 0},
                                {double(frame_w - 1), 0},
                                {0, double(frame_h - 1)},
                                {double(frame_w - 1), double(frame_h - 1)}};
  for (const auto& t : path.to_global) {
    for (const auto& c : corners) {
      const Point2 p = apply(t, {c[0], c[1]});
      if (first) {
        min_x = max_x = p.x;
        min_y = max_y = p.y;
        first = false;
      } else {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
      }
    }
  }
  PanoramaExtent e;
  const double fx = std::floor(min_x), fy = std::floor(min_y);
  e.width = int(std::ceil(max_x) - fx) + 1;
  e.height = int(std::ceil(max_y) - fy) + 1;
  e.offset_x = -fx;
  e.offset_y = -fy;
  return e;
}

RegisteredFrame warp_frame(const ImageBuffer& frame, const AffineTransform2D& t,
                           const PanoramaExtent& extent) {
  const AffineTransform2D inv = invert(t);

  // Bounding box of the transformed frame polygon, clipped to the extent.
  double min_x = 1e30, min_y = 1e30, max_x = -1e30, max_y = -1e30;
  const double corners[4][2] = {{0, 0},
                                {double(frame.width - 1), 0},
                                {0, double(frame.height - 1)},
                                {double(frame.width - 1), double(frame.height - 1)}};
  for (const auto& c : corners) {
    const Point2 p = apply(t, {c[0], c[1]});
    min_x = std::min(min_x, p.x + extent.offset_x);
    max_x = std::max(max_x, p.x + extent.offset_x);
    min_y = std::min(min_y, p.y + extent.offset_y);
    max_y = std::max(max_y, p.y + extent.offset_y);
  }
  const int x0 = std::max(0, int(std::floor(min_x)));
  const int y0 = std::max(0, int(std::floor(min_y)));
  const int x1 = std::min(extent.width - 1, int(std::ceil(max_x)));
  const int y1 = std::min(extent.height - 1, int(std::ceil(max_y)));

  RegisteredFrame out;
  out.mask = BinaryMask(extent.width, extent.height);
  if (x1 < x0 || y1 < y0) return out;  // entirely outside the extent

  out.x0 = x0;
  out.y0 = y0;
  out.box_w = x1 - x0 + 1;
  out.box_h = y1 - y0 + 1;
  out.pixels.assign(size_t(out.box_w) * out.box_h * 3, 0);

#pragma omp parallel for schedule(static)
  for (int py = y0; py <= y1; ++py) {
    for (int px = x0; px <= x1; ++px) {
      const Point2 src = apply(inv, {px - extent.offset_x, py - extent.offset_y});
      if (!in_sample_domain(frame.width, frame.height, src.x, src.y)) continue;
      double rgb[3];
      sample_bilinear(frame, src.x, src.y, rgb);
      uint8_t* dst = &out.pixels[(size_t(py - y0) * out.box_w + (px - x0)) * 3];
      for (int c = 0; c < 3; ++c)
        dst[c] = uint8_t(std::lround(std::clamp(rgb[c], 0.0, 255.0)));
      out.mask.set(px, py, true);
    }
  }
  return out;
}

Panorama composite_background(const std::vector<RegisteredFrame>& frames,
                              const PanoramaExtent& extent) {
  if (frames.empty()) throw EmptyInput("composite_background: no frames");
  for (const auto& f : frames)
    if (f.mask.width != extent.width || f.mask.height != extent.height)
      throw GeometryMismatch("registered frame extent mismatch");

  Panorama pano;
  pano.image = ImageBuffer(extent.width, extent.height);
  pano.offset_x = extent.offset_x;
  pano.offset_y = extent.offset_y;
  pano.coverage.assign(size_t(extent.width) * extent.height, 0);

#pragma omp parallel for schedule(dynamic, 8)
  for (int y = 0; y < extent.height; ++y) {
    std::vector<uint8_t> stack[3];
    for (auto& s : stack) s.reserve(frames.size());
    for (int x = 0; x < extent.width; ++x) {
      for (auto& s : stack) s.clear();
      for (const auto& f : frames) {
        if (!f.mask.get(x, y)) continue;
        const uint8_t* p = f.at(x, y);
        for (int c = 0; c < 3; ++c) stack[c].push_back(p[c]);
      }
      const size_t n = stack[0].size();
      pano.coverage[size_t(y) * extent.width + x] = uint16_t(n);
      if (n == 0) continue;  // never written: stays black, coverage 0
      uint8_t* dst = pano.image.at(x, y);
      const size_t mid = (n - 1) / 2;  // lower median for even counts
      for (int c = 0; c < 3; ++c) {
        std::nth_element(stack[c].begin(), stack[c].begin() + mid, stack[c].end());
        dst[c] = stack[c][mid];
      }
    }
  }
  return pano;
}

RegisteredFrame project_frame(int frame_index, const CameraPath& path,
                              const PanoramaExtent& extent, const ImageBuffer& frame) {
  RegisteredFrame out = warp_frame(frame, path.to_global[frame_index], extent);
  out.frame_index = frame_index;
  return out;
}

}  // namespace divetrack
