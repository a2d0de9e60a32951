#include "divetrack/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace divetrack {

Hsv rgb_to_hsv(uint8_t r8, uint8_t g8, uint8_t b8) {
  const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  const double v = std::max({r, g, b});
  const double c = v - std::min({r, g, b});
  Hsv out;
  out.v = v;
  out.s = v > 0.0 ? c / v : 0.0;
  if (c > 0.0) {
    double h;
    if (v == r)
      h = (g - b) / c;
    else if (v == g)
      h = 2.0 + (b - r) / c;
    else
      h = 4.0 + (r - g) / c;
    h *= 60.0;
    if (h < 0.0) h += 360.0;
    out.h = h;
  }
  return out;
}

bool hsv_in_range(const Hsv& c, const HsvRange& range) {
  if (c.s < range.s_low || c.s > range.s_high) return false;
  if (c.v < range.v_low || c.v > range.v_high) return false;
  if (range.h_low <= range.h_high)
    return c.h >= range.h_low && c.h <= range.h_high;
  return c.h >= range.h_low || c.h <= range.h_high;  // wraps through 0
}

BinaryMask hsv_threshold(const ImageBuffer& img, const HsvRange& range) {
  BinaryMask mask(img.width, img.height);
  const int n = img.width * img.height;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const uint8_t* p = &img.pixels[size_t(i) * 3];
    mask.bits[i] = hsv_in_range(rgb_to_hsv(p[0], p[1], p[2]), range) ? 1 : 0;
  }
  return mask;
}

BinaryMask subtract_background(const BinaryMask& frame_mask, const BinaryMask& bg_mask,
                               int guard_dilate) {
  if (!frame_mask.same_geometry(bg_mask))
    throw GeometryMismatch("subtract_background: mask geometry differs");
  const BinaryMask guard = dilate(bg_mask, guard_dilate);
  BinaryMask out(frame_mask.width, frame_mask.height);
  for (size_t i = 0; i < out.bits.size(); ++i)
    out.bits[i] = (frame_mask.bits[i] && !guard.bits[i]) ? 1 : 0;
  return out;
}

std::vector<Component> connected_components(const BinaryMask& mask) {
  const int w = mask.width, h = mask.height;
  std::vector<int> label(size_t(w) * h, -1);
  std::vector<Component> out;

  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const size_t start = size_t(sy) * w + sx;
      if (!mask.bits[start] || label[start] >= 0) continue;

      Component comp;
      comp.min_x = comp.max_x = sx;
      comp.min_y = comp.max_y = sy;
      const int id = int(out.size());
      std::deque<int> queue{int(start)};
      label[start] = id;
      double sum_x = 0.0, sum_y = 0.0;
      while (!queue.empty()) {
        const int idx = queue.front();
        queue.pop_front();
        const int x = idx % w, y = idx / w;
        comp.pixels.push_back(idx);
        sum_x += x;
        sum_y += y;
        comp.min_x = std::min(comp.min_x, x);
        comp.max_x = std::max(comp.max_x, x);
        comp.min_y = std::min(comp.min_y, y);
        comp.max_y = std::max(comp.max_y, y);
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx;
            if (xx < 0 || xx >= w || (dx == 0 && dy == 0)) continue;
            const size_t ni = size_t(yy) * w + xx;
            if (mask.bits[ni] && label[ni] < 0) {
              label[ni] = id;
              queue.push_back(int(ni));
            }
          }
        }
      }
      comp.area = (long long)comp.pixels.size();
      comp.centroid = {sum_x / double(comp.area), sum_y / double(comp.area)};
      out.push_back(std::move(comp));
    }
  }
  return out;
}

const Component& select_subject(const std::vector<Component>& components,
                                long long min_area,
                                const std::optional<Point2>& previous) {
  const Component* best = nullptr;
  for (const auto& c : components) {
    if (c.area < min_area) continue;
    if (!best) {
      best = &c;
      continue;
    }
    if (c.area > best->area) {
      best = &c;
    } else if (c.area == best->area && previous) {
      const auto d2 = [&](const Component& comp) {
        const double dx = comp.centroid.x - previous->x;
        const double dy = comp.centroid.y - previous->y;
        return dx * dx + dy * dy;
      };
      if (d2(c) < d2(*best)) best = &c;
    }
    // remaining ties keep the earlier scan-order component
  }
  if (!best) throw NoSubject("no component survives the area filter");
  return *best;
}

Point2 barycenter(const Component& c) {
  return c.centroid;
}

}  // namespace divetrack
