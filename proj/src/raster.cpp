#include "divetrack/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace divetrack {

size_t BinaryMask::count() const {
  return size_t(std::count(bits.begin(), bits.end(), uint8_t(1)));
}

GrayImage to_grayscale(const ImageBuffer& img) {
  GrayImage out(img.width, img.height);
  const int n = img.width * img.height;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const uint8_t* p = &img.pixels[size_t(i) * 3];
    out.values[i] = float((0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0);
  }
  return out;
}

IntegralImage integral(const GrayImage& img) {
  IntegralImage out;
  out.width = img.width;
  out.height = img.height;
  const int w1 = img.width + 1;
  out.sums.assign(size_t(w1) * (img.height + 1), 0.0);
  for (int y = 0; y < img.height; ++y) {
    double row = 0.0;
    const float* src = &img.values[size_t(y) * img.width];
    const double* above = &out.sums[size_t(y) * w1];
    double* cur = &out.sums[size_t(y + 1) * w1];
    for (int x = 0; x < img.width; ++x) {
      row += src[x];
      cur[x + 1] = above[x + 1] + row;
    }
  }
  return out;
}

namespace {

struct BilinearWeights {
  int x0, y0, x1, y1;
  double wx, wy;
};

inline BilinearWeights bilinear_setup(int w, int h, double x, double y) {
  int x0 = int(std::floor(x));
  int y0 = int(std::floor(y));
  if (x0 > w - 2) x0 = w - 2;
  if (y0 > h - 2) y0 = h - 2;
  if (x0 < 0) x0 = 0;
  if (y0 < 0) y0 = 0;
  int x1 = std::min(x0 + 1, w - 1);
  int y1 = std::min(y0 + 1, h - 1);
  return {x0, y0, x1, y1, x - x0, y - y0};
}

}  // namespace

float sample_bilinear(const GrayImage& img, double x, double y) {
  if (!in_sample_domain(img.width, img.height, x, y))
    throw OutOfBounds("sample_bilinear: point outside image domain");
  const auto b = bilinear_setup(img.width, img.height, x, y);
  const double v00 = img.at(b.x0, b.y0), v10 = img.at(b.x1, b.y0);
  const double v01 = img.at(b.x0, b.y1), v11 = img.at(b.x1, b.y1);
  return float((1 - b.wy) * ((1 - b.wx) * v00 + b.wx * v10) +
               b.wy * ((1 - b.wx) * v01 + b.wx * v11));
}

void sample_bilinear(const ImageBuffer& img, double x, double y, double out[3]) {
  if (!in_sample_domain(img.width, img.height, x, y))
    throw OutOfBounds("sample_bilinear: point outside image domain");
  const auto b = bilinear_setup(img.width, img.height, x, y);
  const uint8_t* p00 = img.at(b.x0, b.y0);
  const uint8_t* p10 = img.at(b.x1, b.y0);
  const uint8_t* p01 = img.at(b.x0, b.y1);
  const uint8_t* p11 = img.at(b.x1, b.y1);
  for (int c = 0; c < 3; ++c) {
    out[c] = (1 - b.wy) * ((1 - b.wx) * p00[c] + b.wx * p10[c]) +
             b.wy * ((1 - b.wx) * p01[c] + b.wx * p11[c]);
  }
}

BinaryMask dilate(const BinaryMask& mask, int iterations) {
  BinaryMask cur = mask;
  const int w = mask.width, h = mask.height;
  for (int it = 0; it < iterations; ++it) {
    BinaryMask next(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        bool on = false;
        for (int dy = -1; dy <= 1 && !on; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx;
            if (xx < 0 || xx >= w) continue;
            if (cur.get(xx, yy)) {
              on = true;
              break;
            }
          }
        }
        next.set(x, y, on);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace divetrack
