#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divetrack/features.hpp"
#include "divetrack/ingest.hpp"
#include "divetrack/mosaic.hpp"
#include "divetrack/segmentation.hpp"
#include "divetrack/tracking.hpp"

namespace divetrack {

struct PipelineConfig {
  std::string detector = "doh";
  double fast_threshold = 20.0 / 255.0;
  double harris_k = 0.04;
  double harris_rel_threshold = 0.01;
  double doh_threshold = 0.0004;

  int max_keypoints = 1500;

  double ratio = 0.8;
  int ransac_iters = 500;
  double ransac_tol = 2.0;
  uint64_t seed = 1;
  std::string reference = "middle";  // middle | first | <index>

  double fps = 20.0;
  double sample_fps = 20.0;

  HsvRange hsv;
  long long min_area = 50;
  int guard_dilate = 2;

  int max_gap = 3;
  int window = 5;
  double water_line_y = -1.0;  // <0: bottom edge of the panorama
  std::optional<double> px_per_meter;

  bool annotate = false;
  int threads = 0;  // 0: runtime default

  void validate() const;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys are errors.
PipelineConfig parse_config_text(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config_file(const std::string& path, PipelineConfig base = {});
std::string dump_config(const PipelineConfig& cfg);

struct MosaicResult {
  CameraPath path;
  PanoramaExtent extent;
  Panorama panorama;
  std::vector<RegisteredFrame> registered;  // one per frame
  std::vector<Point2> displacement;
};

struct TrackResult {
  MosaicResult mosaic;
  Trajectory trajectory;  // panorama coordinates, smoothed series filled
  DiveMetrics dive;
  // per frame, linear pixel indices of the selected subject (empty if none)
  std::vector<std::vector<int>> subject_pixels;
};

struct DetectorComparison {
  std::string detector;
  double mean_matches = 0.0;
};

/// Algorithm stages as library calls; the CLI is a thin wrapper over these.
MosaicResult run_mosaic(const FrameSequence& frames, const PipelineConfig& cfg);
TrackResult run_track(const FrameSequence& frames, const PipelineConfig& cfg);
std::vector<DetectorComparison> run_compare_detectors(const FrameSequence& frames,
                                                      const PipelineConfig& cfg);

std::string camera_path_to_csv(const CameraPath& path);

// File-emitting entry points used by the CLI subcommands.
void cmd_mosaic(const std::string& input_dir, const std::string& out_dir,
                const PipelineConfig& cfg);
void cmd_track(const std::string& input_dir, const std::string& out_dir,
               const PipelineConfig& cfg);
void cmd_compare_detectors(const std::string& input_dir, const std::string& out_csv,
                           const PipelineConfig& cfg);

}  // namespace divetrack
