#include "divetrack/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace divetrack {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Trajectory assemble(const std::vector<BarycenterSample>& samples, int max_gap) {
  Trajectory traj;
  traj.samples = samples;
  auto& s = traj.samples;

  bool any_valid = std::any_of(s.begin(), s.end(),
                               [](const BarycenterSample& b) { return b.valid; });
  if (!any_valid) throw NoValidSamples("no frame produced a barycentre");

  int prev_valid = -1;
  for (int i = 0; i <= int(s.size()); ++i) {
    const bool valid = i < int(s.size()) && s[i].valid;
    if (!valid && i < int(s.size())) continue;
    if (prev_valid >= 0 && i - prev_valid > 1 && i < int(s.size())) {
      const int gap = i - prev_valid - 1;
      if (gap <= max_gap) {
        for (int k = prev_valid + 1; k < i; ++k) {
          const double f = double(k - prev_valid) / double(i - prev_valid);
          s[k].x = s[prev_valid].x + f * (s[i].x - s[prev_valid].x);
          s[k].y = s[prev_valid].y + f * (s[i].y - s[prev_valid].y);
          s[k].valid = true;
          s[k].interpolated = true;
        }
      }
    }
    if (i < int(s.size())) prev_valid = i;
  }

  traj.smoothed.resize(s.size());
  for (size_t i = 0; i < s.size(); ++i) traj.smoothed[i] = {s[i].x, s[i].y};
  return traj;
}

Trajectory smooth(const Trajectory& traj, int window) {
  if (window < 1 || window % 2 == 0)
    throw BadWindow("smoothing window must be odd and >= 1");
  Trajectory out = traj;
  const auto& s = traj.samples;
  const int n = int(s.size());
  const int radius = window / 2;
  for (int i = 0; i < n; ++i) {
    const int r = std::min({radius, i, n - 1 - i});  // shrink near the ends
    double sx = 0.0, sy = 0.0;
    int count = 0;
    for (int k = i - r; k <= i + r; ++k) {
      if (!s[k].valid) continue;
      sx += s[k].x;
      sy += s[k].y;
      ++count;
    }
    out.smoothed[i] = count > 0 ? Point2{sx / count, sy / count}
                                : Point2{s[i].x, s[i].y};
  }
  return out;
}

DiveMetrics metrics(const Trajectory& traj, double water_line_y,
                    std::optional<double> px_per_meter) {
  const auto& s = traj.samples;
  DiveMetrics m;

  int first_valid = -1, apex = -1;
  double apex_h = -1e30;
  for (int i = 0; i < int(s.size()); ++i) {
    if (!s[i].valid) continue;
    if (first_valid < 0) first_valid = i;
    const double h = water_line_y - traj.smoothed[i].y;
    if (h > apex_h) {
      apex_h = h;
      apex = i;
    }
  }
  if (first_valid < 0) throw NoValidSamples("metrics: empty trajectory");

  m.max_height_px = apex_h;
  m.apex_time = s[apex].t;
  m.no_apex = (apex == first_valid);
  if (px_per_meter && *px_per_meter > 0.0)
    m.max_height_m = apex_h / *px_per_meter;

  // Entry: first downward crossing of the water line after the apex,
  // interpolated between the bracketing samples.
  for (int i = apex; i + 1 < int(s.size()); ++i) {
    if (!s[i].valid || !s[i + 1].valid) continue;
    const double h0 = water_line_y - traj.smoothed[i].y;
    const double h1 = water_line_y - traj.smoothed[i + 1].y;
    if (h0 > 0.0 && h1 <= 0.0) {
      const double f = h0 / (h0 - h1);
      m.entry_time = s[i].t + f * (s[i + 1].t - s[i].t);
      m.entry_x = traj.smoothed[i].x + f * (traj.smoothed[i + 1].x - traj.smoothed[i].x);
      break;
    }
  }

  const double x0 = traj.smoothed[first_valid].x;
  for (int i = first_valid; i < int(s.size()); ++i) {
    if (!s[i].valid || s[i].t > m.apex_time) continue;
    m.lateral_deviation_px = std::max(m.lateral_deviation_px,
                                      std::abs(traj.smoothed[i].x - x0));
  }
  return m;
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << "frame,t_s,x_px,y_px,valid,interpolated,x_smooth,y_smooth,area_px\n";
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i];
    out << s.frame_index << ',' << fmt_double(s.t) << ',' << fmt_double(s.x) << ','
        << fmt_double(s.y) << ',' << (s.valid ? 1 : 0) << ','
        << (s.interpolated ? 1 : 0) << ',' << fmt_double(traj.smoothed[i].x) << ','
        << fmt_double(traj.smoothed[i].y) << ',' << s.area << '\n';
  }
  return out.str();
}

Trajectory trajectory_from_csv(const std::string& csv) {
  Trajectory traj;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 9) throw Error("bad trajectory CSV row: " + line);
    BarycenterSample s;
    s.frame_index = std::stoi(fields[0]);
    s.t = std::stod(fields[1]);
    s.x = std::stod(fields[2]);
    s.y = std::stod(fields[3]);
    s.valid = fields[4] == "1";
    s.interpolated = fields[5] == "1";
    s.area = std::stoll(fields[8]);
    traj.samples.push_back(s);
    traj.smoothed.push_back({std::stod(fields[6]), std::stod(fields[7])});
  }
  return traj;
}

std::string trajectory_to_svg(const Trajectory& traj) {
  const int width = 800, height = 500, margin = 50;
  double t_min = 1e30, t_max = -1e30, y_min = 1e30, y_max = -1e30;
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    const auto& s = traj.samples[i];
    t_min = std::min(t_min, s.t);
    t_max = std::max(t_max, s.t);
    if (!s.valid) continue;
    y_min = std::min({y_min, s.y, traj.smoothed[i].y});
    y_max = std::max({y_max, s.y, traj.smoothed[i].y});
  }
  if (t_max <= t_min) t_max = t_min + 1;
  if (y_max <= y_min) y_max = y_min + 1;

  auto px = [&](double t) {
    return margin + (t - t_min) / (t_max - t_min) * (width - 2 * margin);
  };
  auto py = [&](double y) {
    return margin + (y - y_min) / (y_max - y_min) * (height - 2 * margin);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // raw series
  for (const auto& s : traj.samples) {
    if (!s.valid) continue;
    svg << "<circle class=\"raw\" cx=\"" << fmt_double(px(s.t)) << "\" cy=\""
        << fmt_double(py(s.y)) << "\" r=\"3\" fill=\"blue\"/>\n";
  }
  // smoothed series
  for (size_t i = 0; i < traj.samples.size(); ++i) {
    if (!traj.samples[i].valid) continue;
    svg << "<circle class=\"smooth\" cx=\"" << fmt_double(px(traj.samples[i].t))
        << "\" cy=\"" << fmt_double(py(traj.smoothed[i].y))
        << "\" r=\"2\" fill=\"red\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string metrics_report(const DiveMetrics& m) {
  std::ostringstream out;
  out << "max_height_px=" << fmt_double(m.max_height_px) << '\n';
  out << "max_height_m=" << (m.max_height_m ? fmt_double(*m.max_height_m) : "none") << '\n';
  out << "apex_time_s=" << fmt_double(m.apex_time) << '\n';
  out << "no_apex=" << (m.no_apex ? 1 : 0) << '\n';
  out << "entry_x_px=" << (m.entry_x ? fmt_double(*m.entry_x) : "none") << '\n';
  out << "entry_time_s=" << (m.entry_time ? fmt_double(*m.entry_time) : "none") << '\n';
  out << "lateral_deviation_px=" << fmt_double(m.lateral_deviation_px) << '\n';
  return out.str();
}

}  // namespace divetrack
