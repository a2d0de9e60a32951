#pragma once

#include <cstdint>
#include <vector>

#include "divetrack/ingest.hpp"
#include "divetrack/registration.hpp"
#include "divetrack/segmentation.hpp"

namespace divetrack {

/// Deterministic synthetic dive scene: a feature-rich textured background, a
/// camera window sliding over it and an ellipse subject on a ballistic arc.
struct SceneSpec {
  int background_w = 1280;
  int background_h = 720;
  uint64_t texture_seed = 7;
  std::vector<Point2> camera_path;  // ground-truth window offset per frame
  // subject
  double ellipse_rx = 14.0;
  double ellipse_ry = 22.0;
  Hsv subject_color{20.0, 0.5, 0.8};
  double subject_x0 = 0.0, subject_y0 = 0.0;  // background coords at t = 0
  double subject_vx = 0.0, subject_vy = 0.0;  // px/s
  double gravity = 0.0;                       // px/s^2, +y is down
  bool subject_enabled = true;

  int frame_w = 640;
  int frame_h = 480;
  double fps = 20.0;
};

struct SynthScene {
  FrameSequence frames;
  std::vector<Point2> truth_path;        // camera offsets, background coords
  std::vector<Point2> truth_trajectory;  // subject centre, background coords
  ImageBuffer background;                // subject-free background
};

/// Renders the scene. Fully deterministic for a fixed spec. Throws
/// SpecOutOfBounds when a camera window leaves the background.
SynthScene generate(const SceneSpec& spec);

/// RMS Euclidean error after aligning both series at reference_index
/// (each series has its value at reference_index subtracted).
double score_path(const std::vector<Point2>& estimated, const std::vector<Point2>& truth,
                  int reference_index);

/// RMS Euclidean error over selected indices, no alignment.
double score_traj(const std::vector<Point2>& estimated, const std::vector<Point2>& truth);

void rgb_from_hsv(const Hsv& c, uint8_t out[3]);

}  // namespace divetrack
