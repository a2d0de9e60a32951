#pragma once

#include <optional>
#include <string>
#include <vector>

#include "divetrack/registration.hpp"

namespace divetrack {

struct BarycenterSample {
  int frame_index = 0;
  double t = 0.0;  // seconds, frame_index / sample_fps
  double x = 0.0;  // panorama px; meaningless when !valid
  double y = 0.0;
  bool valid = false;
  bool interpolated = false;
  long long area = 0;
};

struct Trajectory {
  std::vector<BarycenterSample> samples;
  std::vector<Point2> smoothed;  // parallel to samples; raw copy until smooth()
};

struct DiveMetrics {
  double max_height_px = 0.0;
  std::optional<double> max_height_m;
  double apex_time = 0.0;
  bool no_apex = false;  // monotone descent: apex pinned to the first sample
  std::optional<double> entry_x;
  std::optional<double> entry_time;
  double lateral_deviation_px = 0.0;
};

/// Fills runs of <= max_gap consecutive invalid samples by linear
/// interpolation between valid neighbours; longer runs stay invalid.
Trajectory assemble(const std::vector<BarycenterSample>& samples, int max_gap = 3);

/// Zero-phase moving average: centered window, shrunk symmetrically near the
/// ends, invalid samples excluded from every average. Window must be odd.
Trajectory smooth(const Trajectory& traj, int window = 5);

/// Dive metrics from the smoothed series. Height is water_line_y - y.
DiveMetrics metrics(const Trajectory& traj, double water_line_y,
                    std::optional<double> px_per_meter = std::nullopt);

/// CSV columns: frame,t_s,x_px,y_px,valid,interpolated,x_smooth,y_smooth,area_px
std::string trajectory_to_csv(const Trajectory& traj);
Trajectory trajectory_from_csv(const std::string& csv);

/// Raw and smoothed vertical position vs time, two series.
std::string trajectory_to_svg(const Trajectory& traj);

std::string metrics_report(const DiveMetrics& m);

}  // namespace divetrack
