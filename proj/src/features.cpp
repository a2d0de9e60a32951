#include "divetrack/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

namespace divetrack {

DetectorKind detector_from_string(const std::string& name) {
  if (name == "fast") return DetectorKind::Fast;
  if (name == "harris") return DetectorKind::Harris;
  if (name == "doh") return DetectorKind::Doh;
  throw Error("unknown detector '" + name + "' (expected fast|harris|doh)");
}

std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Fast: return "fast";
    case DetectorKind::Harris: return "harris";
    case DetectorKind::Doh: return "doh";
  }
  return "?";
}

int hamming_distance(const Descriptor& a, const Descriptor& b) {
  int d = 0;
  for (int i = 0; i < 4; ++i) d += std::popcount(a.bits[i] ^ b.bits[i]);
  return d;
}

namespace {

// 16-pixel Bresenham circle of radius 3, clockwise from 12 o'clock.
constexpr int kCircleDx[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
constexpr int kCircleDy[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};

// Deterministic 3x3 non-max suppression: keep a pixel when its response is
// >= all 8 neighbours and strictly greater than the neighbours that precede
// it in row-major order (one survivor per plateau).
template <typename F>
void nms3x3(const std::vector<float>& resp, int w, int h, F&& emit) {
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const float r = resp[size_t(y) * w + x];
      if (r <= 0.f) continue;
      bool keep = true;
      for (int dy = -1; dy <= 1 && keep; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const float n = resp[size_t(y + dy) * w + (x + dx)];
          const bool precedes = dy < 0 || (dy == 0 && dx < 0);
          if (precedes ? (n >= r) : (n > r)) {
            keep = false;
            break;
          }
        }
      }
      if (keep) emit(x, y, r);
    }
  }
}

}  // namespace

std::vector<Keypoint> detect_fast(const GrayImage& img, double threshold) {
  const int w = img.width, h = img.height;
  if (w < 7 || h < 7) throw ImageTooSmall("detect_fast needs at least 7x7");

  std::vector<float> resp(size_t(w) * h, 0.f);
  const float t = float(threshold);

#pragma omp parallel for schedule(static)
  for (int y = 3; y < h - 3; ++y) {
    for (int x = 3; x < w - 3; ++x) {
      const float p = img.at(x, y);
      float circle[16];
      for (int i = 0; i < 16; ++i)
        circle[i] = img.at(x + kCircleDx[i], y + kCircleDy[i]);

      // Segment test: a contiguous arc of >= 9 pixels, all brighter than p+t
      // or all darker than p-t. Scan the doubled circle once per polarity.
      bool corner = false;
      for (int polarity = 0; polarity < 2 && !corner; ++polarity) {
        int run = 0;
        for (int i = 0; i < 16 + 9; ++i) {
          const float v = circle[i & 15];
          const bool on = polarity == 0 ? (v > p + t) : (v < p - t);
          run = on ? run + 1 : 0;
          if (run >= 9) {
            corner = true;
            break;
          }
        }
      }
      if (!corner) continue;

      float bright = 0.f, dark = 0.f;
      for (int i = 0; i < 16; ++i) {
        const float d = circle[i] - p;
        if (d > t) bright += d - t;
        if (-d > t) dark += -d - t;
      }
      resp[size_t(y) * w + x] = std::max(bright, dark);
    }
  }

  std::vector<Keypoint> out;
  nms3x3(resp, w, h, [&](int x, int y, float r) {
    out.push_back({double(x), double(y), double(r), 1.2, DetectorKind::Fast});
  });
  return out;
}

std::vector<Keypoint> detect_harris(const GrayImage& img, double k, double rel_threshold) {
  const int w = img.width, h = img.height;
  if (w < 9 || h < 9) throw ImageTooSmall("detect_harris needs at least 9x9");

  // 5x5 Gaussian taps, sigma 1.
  double g[5];
  double gsum = 0.0;
  for (int i = 0; i < 5; ++i) {
    g[i] = std::exp(-double((i - 2) * (i - 2)) / 2.0);
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;

  std::vector<float> ixx(size_t(w) * h, 0.f), iyy(size_t(w) * h, 0.f), ixy(size_t(w) * h, 0.f);
#pragma omp parallel for schedule(static)
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const float gx = (img.at(x + 1, y) - img.at(x - 1, y)) * 0.5f;
      const float gy = (img.at(x, y + 1) - img.at(x, y - 1)) * 0.5f;
      const size_t i = size_t(y) * w + x;
      ixx[i] = gx * gx;
      iyy[i] = gy * gy;
      ixy[i] = gx * gy;
    }
  }

  // Separable smoothing, then the corner response.
  auto smooth = [&](const std::vector<float>& src) {
    std::vector<float> tmp(size_t(w) * h, 0.f), dst(size_t(w) * h, 0.f);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
      for (int x = 2; x < w - 2; ++x) {
        double s = 0.0;
        for (int i = -2; i <= 2; ++i) s += g[i + 2] * src[size_t(y) * w + x + i];
        tmp[size_t(y) * w + x] = float(s);
      }
#pragma omp parallel for schedule(static)
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
#pragma omp parallel for schedule(static) reduction(max : max_r)
  for (int y = 3; y < h - 3; ++y) {
    for (int x = 3; x < w - 3; ++x) {
      const size_t i = size_t(y) * w + x;
      const double det = double(sxx[i]) * syy[i] - double(sxy[i]) * sxy[i];
      const double tr = double(sxx[i]) + syy[i];
      const float r = float(det - k * tr * tr);
      resp[i] = r;
      max_r = std::max(max_r, r);
    }
  }
  if (max_r <= 0.f) return {};

  const float cutoff = float(rel_threshold) * max_r;
  std::vector<Keypoint> out;
  nms3x3(resp, w, h, [&](int x, int y, float r) {
    if (r >= cutoff)
      out.push_back({double(x), double(y), double(r), 1.2, DetectorKind::Harris});
  });
  return out;
}

namespace {

constexpr int kDohSizes[4] = {9, 15, 21, 27};

// Scale-normalized determinant-of-Hessian response at one box-filter size.
std::vector<float> doh_response(const IntegralImage& ii, int size) {
  const int w = ii.width, h = ii.height;
  const int lobe = size / 3;
  const int margin = (3 * lobe) / 2 + 1;
  const double inv_area = 1.0 / (double(size) * size);
  std::vector<float> resp(size_t(w) * h, -std::numeric_limits<float>::infinity());

#pragma omp parallel for schedule(static)
  for (int y = margin; y < h - margin; ++y) {
    for (int x = margin; x < w - margin; ++x) {
      const int half = (3 * lobe - 1) / 2;
      // Dyy: (2*lobe-1) x (3*lobe) box minus 3x the middle lobe-high band.
      const double whole_yy =
          ii.rect_sum(x - lobe + 1, y - half, x + lobe, y - half + 3 * lobe);
      const double mid_yy =
          ii.rect_sum(x - lobe + 1, y - (lobe - 1) / 2, x + lobe, y - (lobe - 1) / 2 + lobe);
      const double dyy = (whole_yy - 3.0 * mid_yy) * inv_area;

      const double whole_xx =
          ii.rect_sum(x - half, y - lobe + 1, x - half + 3 * lobe, y + lobe);
      const double mid_xx =
          ii.rect_sum(x - (lobe - 1) / 2, y - lobe + 1, x - (lobe - 1) / 2 + lobe, y + lobe);
      const double dxx = (whole_xx - 3.0 * mid_xx) * inv_area;

      const double tr = ii.rect_sum(x + 1, y - lobe, x + 1 + lobe, y);
      const double bl = ii.rect_sum(x - lobe, y + 1, x, y + 1 + lobe);
      const double tl = ii.rect_sum(x - lobe, y - lobe, x, y);
      const double br = ii.rect_sum(x + 1, y + 1, x + 1 + lobe, y + 1 + lobe);
      const double dxy = (tr + bl - tl - br) * inv_area;

      resp[size_t(y) * w + x] = float(dxx * dyy - 0.81 * dxy * dxy);
    }
  }
  return resp;
}

}  // namespace

std::vector<Keypoint> detect_doh(const GrayImage& img, double threshold) {
  const int w = img.width, h = img.height;
  if (w < 27 || h < 27) throw ImageTooSmall("detect_doh needs at least 27x27");

  const auto ii = integral(img);
  std::vector<std::vector<float>> resp(4);
  for (int s = 0; s < 4; ++s) resp[s] = doh_response(ii, kDohSizes[s]);

  std::vector<Keypoint> out;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      for (int s = 0; s < 4; ++s) {
        const float r = resp[s][size_t(y) * w + x];
        if (!(r > threshold)) continue;
        bool keep = true;
        for (int ds = -1; ds <= 1 && keep; ++ds) {
          const int ss = s + ds;
          if (ss < 0 || ss > 3) continue;
          for (int dy = -1; dy <= 1 && keep; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              if (ds == 0 && dx == 0 && dy == 0) continue;
              const float n = resp[ss][size_t(y + dy) * w + (x + dx)];
              const bool precedes = dy < 0 || (dy == 0 && dx < 0) ||
                                    (dy == 0 && dx == 0 && ds < 0);
              if (precedes ? (n >= r) : (n > r)) {
                keep = false;
                break;
              }
            }
          }
        }
        if (keep)
          out.push_back({double(x), double(y), double(r),
                         1.2 * kDohSizes[s] / 9.0, DetectorKind::Doh});
      }
    }
  }
  return out;
}

namespace {

struct BriefPattern {
  int8_t ax[256], ay[256], bx[256], by[256];
};

// Comparison-point pattern, fixed for all runs and platforms (seed 0x5EED).
// Offsets stay within +-12 so the 5x5 smoothing window fits the 31x31 patch.
const BriefPattern& brief_pattern() {
  static const BriefPattern pattern = [] {
    BriefPattern p;
    std::mt19937 rng(0x5EED);
    auto draw = [&rng] { return int8_t(int(rng() % 25) - 12); };
    for (int i = 0; i < 256; ++i) {
      p.ax[i] = draw();
      p.ay[i] = draw();
      p.bx[i] = draw();
      p.by[i] = draw();
    }
    return p;
  }();
  return pattern;
}

}  // namespace

DescribeResult describe(const GrayImage& img, const std::vector<Keypoint>& kps) {
  const auto& pat = brief_pattern();
  const int w = img.width, h = img.height;
  DescribeResult res;

  std::vector<int> kept;
  for (int i = 0; i < int(kps.size()); ++i) {
    const int cx = int(std::lround(kps[i].x));
    const int cy = int(std::lround(kps[i].y));
    if (cx >= 15 && cy >= 15 && cx < w - 15 && cy < h - 15)
      kept.push_back(i);
    else
      res.dropped.push_back(i);
  }

  // 5x5 box sums via the integral image; one tap per comparison point.
  const IntegralImage ii = integral(img);

  res.descriptors.resize(kept.size());
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < (long long)kept.size(); ++j) {
    const int idx = kept[j];
    const int cx = int(std::lround(kps[idx].x));
    const int cy = int(std::lround(kps[idx].y));
    auto smoothed = [&](int dx, int dy) {
      return ii.rect_sum(cx + dx - 2, cy + dy - 2, cx + dx + 3, cy + dy + 3);
    };
    Descriptor d;
    d.keypoint_index = idx;
    for (int i = 0; i < 256; ++i) {
      if (smoothed(pat.ax[i], pat.ay[i]) < smoothed(pat.bx[i], pat.by[i]))
        d.bits[i >> 6] |= uint64_t(1) << (i & 63);
    }
    res.descriptors[j] = d;
  }
  return res;
}

std::vector<Keypoint> strongest(std::vector<Keypoint> kps, size_t n) {
  auto by_position = [](const Keypoint& a, const Keypoint& b) {
    return a.y != b.y ? a.y < b.y : (a.x != b.x ? a.x < b.x : a.scale < b.scale);
  };
  if (kps.size() > n) {
    std::sort(kps.begin(), kps.end(), [&](const Keypoint& a, const Keypoint& b) {
      return a.response != b.response ? a.response > b.response : by_position(a, b);
    });
    kps.resize(n);
  }
  std::sort(kps.begin(), kps.end(), by_position);
  return kps;
}

std::vector<Keypoint> detect(const GrayImage& img, DetectorKind kind,
                             double fast_threshold, double harris_k,
                             double harris_rel_threshold, double doh_threshold) {
  switch (kind) {
    case DetectorKind::Fast: return detect_fast(img, fast_threshold);
    case DetectorKind::Harris: return detect_harris(img, harris_k, harris_rel_threshold);
    case DetectorKind::Doh: return detect_doh(img, doh_threshold);
  }
  return {};
}

}  // namespace divetrack
