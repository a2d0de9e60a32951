#pragma once

#include <string>
#include <vector>

#include "divetrack/raster.hpp"

namespace divetrack {

struct FrameSequence {
  std::vector<ImageBuffer> frames;
  double source_fps = 0.0;
  double sample_fps = 0.0;
  std::vector<double> timestamps;  // seconds, uniform spacing 1/sample_fps
  std::vector<std::string> warnings;
};

/// Loads a numbered frame directory (frame_*.png / *.ppm, ordered by name)
/// and decimates it to sample_fps. Keeps every round(source/sample)-th frame
/// starting at index 0. Records a warning when sample_fps < 6 Hz.
FrameSequence load_sequence(const std::string& dir, double source_fps, double sample_fps);

}  // namespace divetrack
