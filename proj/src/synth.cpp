#include "divetrack/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace divetrack {

void rgb_from_hsv(const Hsv& c, uint8_t out[3]) {
  const double chroma = c.v * c.s;
  const double hp = c.h / 60.0;
  const double x = chroma * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1)
    r = chroma, g = x;
  else if (hp < 2)
    r = x, g = chroma;
  else if (hp < 3)
    g = chroma, b = x;
  else if (hp < 4)
    g = x, b = chroma;
  else if (hp < 5)
    r = x, b = chroma;
  else
    r = chroma, b = x;
  const double m = c.v - chroma;
  out[0] = uint8_t(std::lround((r + m) * 255.0));
  out[1] = uint8_t(std::lround((g + m) * 255.0));
  out[2] = uint8_t(std::lround((b + m) * 255.0));
}

namespace {

uint64_t splitmix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// High-contrast blue/cyan texture: checker base plus seeded bright blobs.
// Every checker cell gets its own hue/value perturbation so that no two
// corners look alike (repeated patches would defeat descriptor matching).
// The palette stays in hue [180,260], far from the skin-tone subject, so the
// default segmentation range never fires on the background.
ImageBuffer render_texture(int w, int h, uint64_t seed) {
  ImageBuffer bg(w, h);
  const int cells_x = (w + 15) / 16;
  std::vector<std::array<uint8_t, 3>> cell_color(size_t(cells_x) * ((h + 15) / 16));
  for (int cy = 0; cy * 16 < h; ++cy)
    for (int cx = 0; cx < cells_x; ++cx) {
      const uint64_t hash = splitmix64(seed ^ (uint64_t(cy) << 32) ^ uint64_t(cx));
      const bool light = (cx + cy) & 1;
      const Hsv base = light ? Hsv{200.0, 0.70, 0.55} : Hsv{220.0, 0.85, 0.30};
      Hsv c = base;
      c.h += double(hash % 41) - 20.0;
      c.s += double((hash >> 8) % 11) / 100.0 - 0.05;
      c.v += double((hash >> 16) % 17) / 100.0 - 0.08;
      rgb_from_hsv(c, cell_color[size_t(cy) * cells_x + cx].data());
    }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto& c = cell_color[size_t(y / 16) * cells_x + x / 16];
      uint8_t* p = bg.at(x, y);
      p[0] = c[0];
      p[1] = c[1];
      p[2] = c[2];
    }
  }

  std::mt19937_64 rng(seed);
  const int blobs = std::max(40, w * h / 8000);
  for (int i = 0; i < blobs; ++i) {
    const int cx = int(rng() % uint64_t(w));
    const int cy = int(rng() % uint64_t(h));
    const int r = 3 + int(rng() % 9);
    uint8_t col[3];
    rgb_from_hsv({190.0 + double(rng() % 70), 0.5 + double(rng() % 40) / 100.0,
                  0.75 + double(rng() % 25) / 100.0},
                 col);
    for (int y = std::max(0, cy - r); y <= std::min(h - 1, cy + r); ++y)
      for (int x = std::max(0, cx - r); x <= std::min(w - 1, cx + r); ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) {
          uint8_t* p = bg.at(x, y);
          p[0] = col[0];
          p[1] = col[1];
          p[2] = col[2];
        }
  }

  // Seeded per-pixel micro-noise (+/-4 levels). Flat cells would otherwise
  // make binary descriptors collapse onto a handful of duplicate patterns.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const uint64_t hash = splitmix64(seed * 0xD1B54A32D192ED03ull ^
                                       (uint64_t(y) * uint64_t(w) + uint64_t(x)));
      uint8_t* p = bg.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const int delta = int((hash >> (8 * c)) % 9) - 4;
        p[c] = uint8_t(std::clamp(int(p[c]) + delta, 0, 255));
      }
    }
  return bg;
}

}  // namespace

SynthScene generate(const SceneSpec& spec) {
  if (spec.camera_path.size() < 2)
    throw SpecOutOfBounds("need at least 2 camera positions");
  for (const auto& c : spec.camera_path) {
    if (c.x < 0 || c.y < 0 || c.x + spec.frame_w > spec.background_w ||
        c.y + spec.frame_h > spec.background_h)
      throw SpecOutOfBounds("camera window leaves the background");
  }

  SynthScene scene;
  scene.background = render_texture(spec.background_w, spec.background_h, spec.texture_seed);

  uint8_t subject_rgb[3];
  rgb_from_hsv(spec.subject_color, subject_rgb);

  const int n = int(spec.camera_path.size());
  scene.frames.frames.resize(n);
  scene.frames.timestamps.resize(n);
  scene.frames.source_fps = spec.fps;
  scene.frames.sample_fps = spec.fps;
  scene.truth_path = spec.camera_path;
  scene.truth_trajectory.resize(n);

#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    const double t = double(k) / spec.fps;
    const Point2 cam = spec.camera_path[k];
    ImageBuffer frame(spec.frame_w, spec.frame_h);
    for (int y = 0; y < spec.frame_h; ++y) {
      for (int x = 0; x < spec.frame_w; ++x) {
        double rgb[3];
        sample_bilinear(scene.background, x + cam.x, y + cam.y, rgb);
        uint8_t* p = frame.at(x, y);
        for (int c = 0; c < 3; ++c) p[c] = uint8_t(std::lround(rgb[c]));
      }
    }

    const double sx = spec.subject_x0 + spec.subject_vx * t;
    const double sy = spec.subject_y0 + spec.subject_vy * t + 0.5 * spec.gravity * t * t;
    scene.truth_trajectory[k] = {sx, sy};

    if (spec.subject_enabled) {
      const double cx = sx - cam.x, cy = sy - cam.y;
      const int x0 = std::max(0, int(std::floor(cx - spec.ellipse_rx)));
      const int x1 = std::min(spec.frame_w - 1, int(std::ceil(cx + spec.ellipse_rx)));
      const int y0 = std::max(0, int(std::floor(cy - spec.ellipse_ry)));
      const int y1 = std::min(spec.frame_h - 1, int(std::ceil(cy + spec.ellipse_ry)));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const double ex = (x - cx) / spec.ellipse_rx;
          const double ey = (y - cy) / spec.ellipse_ry;
          if (ex * ex + ey * ey <= 1.0) {
            uint8_t* p = frame.at(x, y);
            p[0] = subject_rgb[0];
            p[1] = subject_rgb[1];
            p[2] = subject_rgb[2];
          }
        }
    }
    scene.frames.frames[k] = std::move(frame);
    scene.frames.timestamps[k] = t;
  }
  return scene;
}

double score_path(const std::vector<Point2>& estimated, const std::vector<Point2>& truth,
                  int reference_index) {
  if (estimated.size() != truth.size())
    throw LengthMismatch("series length mismatch");
  if (estimated.empty()) return 0.0;
  const Point2 e0 = estimated[reference_index];
  const Point2 t0 = truth[reference_index];
  double acc = 0.0;
  for (size_t i = 0; i < estimated.size(); ++i) {
    const double dx = (estimated[i].x - e0.x) - (truth[i].x - t0.x);
    const double dy = (estimated[i].y - e0.y) - (truth[i].y - t0.y);
    acc += dx * dx + dy * dy;
  }
  return std::sqrt(acc / double(estimated.size()));
}

double score_traj(const std::vector<Point2>& estimated, const std::vector<Point2>& truth) {
  if (estimated.size() != truth.size())
    throw LengthMismatch("series length mismatch");
  if (estimated.empty()) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < estimated.size(); ++i) {
    const double dx = estimated[i].x - truth[i].x;
    const double dy = estimated[i].y - truth[i].y;
    acc += dx * dx + dy * dy;
  }
  return std::sqrt(acc / double(estimated.size()));
}

}  // namespace divetrack
