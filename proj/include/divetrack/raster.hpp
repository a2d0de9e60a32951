#pragma once

#include <cstdint>
#include <vector>

#include "divetrack/errors.hpp"

namespace divetrack {

/// 8-bit RGB raster, row-major.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // 3 bytes per pixel, r g b

  ImageBuffer() = default;
  ImageBuffer(int w, int h) : width(w), height(h), pixels(size_t(w) * h * 3, 0) {}

  uint8_t* at(int x, int y) { return &pixels[(size_t(y) * width + x) * 3]; }
  const uint8_t* at(int x, int y) const { return &pixels[(size_t(y) * width + x) * 3]; }

  bool same_geometry(const ImageBuffer& o) const {
    return width == o.width && height == o.height;
  }
};

/// Luminance raster, values in [0,1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  GrayImage() = default;
  GrayImage(int w, int h) : width(w), height(h), values(size_t(w) * h, 0.f) {}

  float& at(int x, int y) { return values[size_t(y) * width + x]; }
  float at(int x, int y) const { return values[size_t(y) * width + x]; }
};

/// Cumulative sums with a zero first row and column: (width+1) x (height+1) taps.
struct IntegralImage {
  int width = 0;   // source image width
  int height = 0;  // source image height
  std::vector<double> sums;

  double tap(int x, int y) const { return sums[size_t(y) * (width + 1) + x]; }

  /// Sum over the half-open rectangle [x0,x1) x [y0,y1).
  double rect_sum(int x0, int y0, int x1, int y1) const {
    return tap(x1, y1) - tap(x0, y1) - tap(x1, y0) + tap(x0, y0);
  }

  /// Same, with the rectangle clipped to the image. Empty after clipping -> 0.
  double rect_sum_clipped(int x0, int y0, int x1, int y1) const {
    if (x0 < 0) x0 = 0;
    if (y0 < 0) y0 = 0;
    if (x1 > width) x1 = width;
    if (y1 > height) y1 = height;
    if (x0 >= x1 || y0 >= y1) return 0.0;
    return rect_sum(x0, y0, x1, y1);
  }
};

/// One boolean per pixel, geometry shared with the image it came from.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), bits(size_t(w) * h, 0) {}

  bool get(int x, int y) const { return bits[size_t(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[size_t(y) * width + x] = v ? 1 : 0; }

  size_t count() const;
  bool same_geometry(const BinaryMask& o) const {
    return width == o.width && height == o.height;
  }
};

/// Rec.601 luminance, (0.299 r + 0.587 g + 0.114 b) / 255.
GrayImage to_grayscale(const ImageBuffer& img);

IntegralImage integral(const GrayImage& img);

/// Bilinear sample; exact at integer coordinates. Throws OutOfBounds outside
/// [0,width-1] x [0,height-1].
float sample_bilinear(const GrayImage& img, double x, double y);

/// Per-channel bilinear sample of an RGB image into out[3].
void sample_bilinear(const ImageBuffer& img, double x, double y, double out[3]);

/// True when (x,y) is inside the bilinear-sampleable domain.
inline bool in_sample_domain(int w, int h, double x, double y) {
  return x >= 0.0 && y >= 0.0 && x <= w - 1 && y <= h - 1;
}

/// 3x3 square dilation applied `iterations` times.
BinaryMask dilate(const BinaryMask& mask, int iterations);

}  // namespace divetrack
