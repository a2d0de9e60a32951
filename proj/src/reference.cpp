#include "divetrack/reference.hpp"

#include <algorithm>
#include <cmath>

namespace divetrack::reference {

GrayImage to_grayscale(const ImageBuffer& img) {
  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const uint8_t* p = img.at(x, y);
      out.at(x, y) = float((0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0);
    }
  return out;
}

BinaryMask hsv_threshold(const ImageBuffer& img, const HsvRange& range) {
  BinaryMask mask(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const uint8_t* p = img.at(x, y);
      mask.set(x, y, hsv_in_range(rgb_to_hsv(p[0], p[1], p[2]), range));
    }
  return mask;
}

RegisteredFrame warp_frame(const ImageBuffer& frame, const AffineTransform2D& t,
                           const PanoramaExtent& extent) {
  const AffineTransform2D inv = invert(t);

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
  if (x1 < x0 || y1 < y0) return out;

  out.x0 = x0;
  out.y0 = y0;
  out.box_w = x1 - x0 + 1;
  out.box_h = y1 - y0 + 1;
  out.pixels.assign(size_t(out.box_w) * out.box_h * 3, 0);

  for (int py = y0; py <= y1; ++py)
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
  return out;
}

Panorama composite_background(const std::vector<RegisteredFrame>& frames,
                              const PanoramaExtent& extent) {
  if (frames.empty()) throw EmptyInput("composite_background: no frames");
  Panorama pano;
  pano.image = ImageBuffer(extent.width, extent.height);
  pano.offset_x = extent.offset_x;
  pano.offset_y = extent.offset_y;
  pano.coverage.assign(size_t(extent.width) * extent.height, 0);

  for (int y = 0; y < extent.height; ++y)
    for (int x = 0; x < extent.width; ++x) {
      std::vector<uint8_t> stack[3];
      for (const auto& f : frames) {
        if (!f.mask.get(x, y)) continue;
        const uint8_t* p = f.at(x, y);
        for (int c = 0; c < 3; ++c) stack[c].push_back(p[c]);
      }
      const size_t n = stack[0].size();
      pano.coverage[size_t(y) * extent.width + x] = uint16_t(n);
      if (n == 0) continue;
      uint8_t* dst = pano.image.at(x, y);
      for (int c = 0; c < 3; ++c) {
        std::sort(stack[c].begin(), stack[c].end());
        dst[c] = stack[c][(n - 1) / 2];
      }
    }
  return pano;
}

std::vector<Keypoint> detect_harris(const GrayImage& img, double k, double rel_threshold) {
  const int w = img.width, h = img.height;
  if (w < 9 || h < 9) throw ImageTooSmall("detect_harris needs at least 9x9");

  double g[5], gsum = 0.0;
  for (int i = 0; i < 5; ++i) {
    g[i] = std::exp(-double((i - 2) * (i - 2)) / 2.0);
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;

  std::vector<float> ixx(size_t(w) * h, 0.f), iyy(size_t(w) * h, 0.f), ixy(size_t(w) * h, 0.f);
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      const float gx = (img.at(x + 1, y) - img.at(x - 1, y)) * 0.5f;
      const float gy = (img.at(x, y + 1) - img.at(x, y - 1)) * 0.5f;
      const size_t i = size_t(y) * w + x;
      ixx[i] = gx * gx;
      iyy[i] = gy * gy;
      ixy[i] = gx * gy;
    }

  auto smooth = [&](const std::vector<float>& src) {
    std::vector<float> tmp(size_t(w) * h, 0.f), dst(size_t(w) * h, 0.f);
    for (int y = 0; y < h; ++y)
      for (int x = 2; x < w - 2; ++x) {
        double s = 0.0;
        for (int i = -2; i <= 2; ++i) s += g[i + 2] * src[size_t(y) * w + x + i];
        tmp[size_t(y) * w + x] = float(s);
      }
    for (int y = 2; y < h - 2; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int i = -2; i <= 2; ++i) s += g[i + 2] * tmp[size_t(y + i) * w + x];
        dst[size_t(y) * w + x] = float(s);
      }
    return dst;
  };
  const auto sxx = smooth(ixx);
  const auto syy = smooth(iyy);
  const auto sxy = smooth(ixy);

  std::vector<float> resp(size_t(w) * h, 0.f);
  float max_r = 0.f;
  for (int y = 3; y < h - 3; ++y)
    for (int x = 3; x < w - 3; ++x) {
      const size_t i = size_t(y) * w + x;
      const double det = double(sxx[i]) * syy[i] - double(sxy[i]) * sxy[i];
      const double tr = double(sxx[i]) + syy[i];
      resp[i] = float(det - k * tr * tr);
      max_r = std::max(max_r, resp[i]);
    }
  if (max_r <= 0.f) return {};

  const float cutoff = float(rel_threshold) * max_r;
  std::vector<Keypoint> out;
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      const float r = resp[size_t(y) * w + x];
      if (r <= 0.f || r < cutoff) continue;
      bool keep = true;
      for (int dy = -1; dy <= 1 && keep; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const float n = resp[size_t(y + dy) * w + (x + dx)];
          const bool precedes = dy < 0 || (dy == 0 && dx < 0);
          if (precedes ? (n >= r) : (n > r)) {
            keep = false;
            break;
          }
        }
      if (keep)
        out.push_back({double(x), double(y), double(r), 1.2, DetectorKind::Harris});
    }
  return out;
}

std::vector<Match> match_descriptors(const std::vector<Descriptor>& a,
                                     const std::vector<Descriptor>& b,
                                     double ratio) {
  if (a.empty() || b.empty()) return {};

  struct Candidate {
    int index_a = -1, index_b = -1, distance = 0;
  };
  std::vector<Candidate> cand(a.size());
  for (int i = 0; i < int(a.size()); ++i) {
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
    const bool keep = b.size() == 1 ? best <= 64 : best < ratio * second;
    if (keep) cand[i] = {i, best_j, best};
  }

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

BinaryMask dilate(const BinaryMask& mask, int iterations) {
  BinaryMask cur = mask;
  for (int it = 0; it < iterations; ++it) {
    BinaryMask next(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y)
      for (int x = 0; x < mask.width; ++x) {
        bool on = false;
        for (int dy = -1; dy <= 1 && !on; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx, yy = y + dy;
            if (xx < 0 || yy < 0 || xx >= mask.width || yy >= mask.height) continue;
            if (cur.get(xx, yy)) {
              on = true;
              break;
            }
          }
        next.set(x, y, on);
      }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace divetrack::reference
