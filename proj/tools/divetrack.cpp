#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "divetrack/image_io.hpp"
#include "divetrack/pipeline.hpp"
#include "divetrack/synth.hpp"

namespace fs = std::filesystem;
using namespace divetrack;

namespace {

struct CommonOpts {
  std::string config_file;
  PipelineConfig overrides;  // flag values land here
  bool dump = false;
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_file, "key = value config file");
  auto& o = opts.overrides;
  cmd->add_option("--detector", o.detector, "fast|harris|doh")->capture_default_str();
  cmd->add_option("--fps", o.fps, "source frame rate")->capture_default_str();
  cmd->add_option("--sample-fps", o.sample_fps, "analysis frame rate")
      ->capture_default_str();
  cmd->add_option("--ratio", o.ratio, "match ratio test")->capture_default_str();
  cmd->add_option("--ransac-iters", o.ransac_iters)->capture_default_str();
  cmd->add_option("--ransac-tol", o.ransac_tol, "inlier tolerance, px")
      ->capture_default_str();
  cmd->add_option("--reference", o.reference, "middle|first|<index>")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed)->capture_default_str();
  cmd->add_option("--h-low", o.hsv.h_low)->capture_default_str();
  cmd->add_option("--h-high", o.hsv.h_high)->capture_default_str();
  cmd->add_option("--s-low", o.hsv.s_low)->capture_default_str();
  cmd->add_option("--s-high", o.hsv.s_high)->capture_default_str();
  cmd->add_option("--v-low", o.hsv.v_low)->capture_default_str();
  cmd->add_option("--v-high", o.hsv.v_high)->capture_default_str();
  cmd->add_option("--min-area", o.min_area)->capture_default_str();
  cmd->add_option("--guard-dilate", o.guard_dilate)->capture_default_str();
  cmd->add_option("--window", o.window, "smoothing window, odd")->capture_default_str();
  cmd->add_option("--max-gap", o.max_gap)->capture_default_str();
  cmd->add_option("--water-line-y", o.water_line_y, "panorama px; <0 = bottom edge")
      ->capture_default_str();
  double ppm = 0.0;
  cmd->add_option_function<double>(
      "--px-per-meter", [&o](double v) { o.px_per_meter = v; }, "metric scale");
  (void)ppm;
  cmd->add_flag("--annotate", o.annotate, "write annotated frames");
  cmd->add_option("--threads", o.threads, "max worker threads (0 = auto)")
      ->capture_default_str();
  cmd->add_flag("--dump-config", opts.dump, "print the effective config and exit");
}

// Flags were parsed directly into the override struct, so the file (when
// given) supplies the base and explicitly-passed flags win.
PipelineConfig effective_config(const CLI::App* cmd, const CommonOpts& opts) {
  if (opts.config_file.empty()) return opts.overrides;
  PipelineConfig cfg = load_config_file(opts.config_file);
  // Re-apply only the flags the user actually passed.
  const PipelineConfig& f = opts.overrides;
  auto passed = [cmd](const std::string& name) { return cmd->count(name) > 0; };
  if (passed("--detector")) cfg.detector = f.detector;
  if (passed("--fps")) cfg.fps = f.fps;
  if (passed("--sample-fps")) cfg.sample_fps = f.sample_fps;
  if (passed("--ratio")) cfg.ratio = f.ratio;
  if (passed("--ransac-iters")) cfg.ransac_iters = f.ransac_iters;
  if (passed("--ransac-tol")) cfg.ransac_tol = f.ransac_tol;
  if (passed("--reference")) cfg.reference = f.reference;
  if (passed("--seed")) cfg.seed = f.seed;
  if (passed("--h-low")) cfg.hsv.h_low = f.hsv.h_low;
  if (passed("--h-high")) cfg.hsv.h_high = f.hsv.h_high;
  if (passed("--s-low")) cfg.hsv.s_low = f.hsv.s_low;
  if (passed("--s-high")) cfg.hsv.s_high = f.hsv.s_high;
  if (passed("--v-low")) cfg.hsv.v_low = f.hsv.v_low;
  if (passed("--v-high")) cfg.hsv.v_high = f.hsv.v_high;
  if (passed("--min-area")) cfg.min_area = f.min_area;
  if (passed("--guard-dilate")) cfg.guard_dilate = f.guard_dilate;
  if (passed("--window")) cfg.window = f.window;
  if (passed("--max-gap")) cfg.max_gap = f.max_gap;
  if (passed("--water-line-y")) cfg.water_line_y = f.water_line_y;
  if (passed("--px-per-meter")) cfg.px_per_meter = f.px_per_meter;
  if (passed("--annotate")) cfg.annotate = f.annotate;
  if (passed("--threads")) cfg.threads = f.threads;
  return cfg;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void run_synth(const std::string& out_dir, int frame_count, double pan_x, double pan_y,
               double jitter, uint64_t seed, bool no_subject, double fps) {
  SceneSpec spec;
  spec.texture_seed = seed;
  spec.fps = fps;
  spec.subject_enabled = !no_subject;

  const double margin_x = 40.0 + std::abs(jitter);
  const double margin_y = 40.0 + std::abs(jitter);
  spec.background_w = int(spec.frame_w + std::abs(pan_x) + 2 * margin_x);
  spec.background_h = int(spec.frame_h + std::abs(pan_y) + 2 * margin_y);

  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  const int jmax = int(std::lround(jitter));
  for (int k = 0; k < frame_count; ++k) {
    const double f = frame_count > 1 ? double(k) / (frame_count - 1) : 0.0;
    double x = margin_x + (pan_x >= 0 ? f * pan_x : (1 - f) * -pan_x);
    double y = margin_y + (pan_y >= 0 ? f * pan_y : (1 - f) * -pan_y);
    if (jmax > 0) {
      x += double(int(rng() % uint64_t(2 * jmax + 1)) - jmax);
      y += double(int(rng() % uint64_t(2 * jmax + 1)) - jmax);
    }
    spec.camera_path.push_back({x, y});
  }

  // Ballistic arc across the panned window.
  spec.subject_x0 = margin_x + spec.frame_w * 0.3;
  spec.subject_y0 = spec.background_h * 0.55;
  const double duration = frame_count / fps;
  spec.subject_vx = pan_x / duration * 0.8;
  spec.subject_vy = -220.0;
  spec.gravity = 2.0 * 220.0 / (0.45 * duration);

  const SynthScene scene = generate(spec);

  fs::create_directories(out_dir);
  for (size_t k = 0; k < scene.frames.frames.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "/frame_%06zu.png", k);
    write_png(out_dir + name, scene.frames.frames[k]);
  }
  std::ofstream path_csv(out_dir + "/truth_path.csv");
  path_csv << "frame,tx_px,ty_px\n";
  for (size_t k = 0; k < scene.truth_path.size(); ++k)
    path_csv << k << ',' << fmt(scene.truth_path[k].x) << ','
             << fmt(scene.truth_path[k].y) << '\n';
  std::ofstream traj_csv(out_dir + "/truth_traj.csv");
  traj_csv << "frame,x_px,y_px\n";
  for (size_t k = 0; k < scene.truth_trajectory.size(); ++k)
    traj_csv << k << ',' << fmt(scene.truth_trajectory[k].x) << ','
             << fmt(scene.truth_trajectory[k].y) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dive-video analysis: mosaicking, segmentation, barycentre tracking"};
  app.require_subcommand(1);

  CommonOpts opts;

  std::string input_dir, out_dir = "out";
  auto* mosaic_cmd = app.add_subcommand("mosaic", "build panorama + camera path");
  mosaic_cmd->add_option("input", input_dir, "frame directory")->required();
  mosaic_cmd->add_option("-o,--out", out_dir, "output directory");
  add_common_flags(mosaic_cmd, opts);

  auto* track_cmd = app.add_subcommand("track", "full pipeline: trajectory + metrics");
  track_cmd->add_option("input", input_dir, "frame directory")->required();
  track_cmd->add_option("-o,--out", out_dir, "output directory");
  add_common_flags(track_cmd, opts);

  std::string compare_out = "detector_comparison.csv";
  auto* compare_cmd =
      app.add_subcommand("compare-detectors", "matched-feature counts per detector");
  compare_cmd->add_option("input", input_dir, "frame directory")->required();
  compare_cmd->add_option("-o,--out", compare_out, "output CSV");
  add_common_flags(compare_cmd, opts);

  std::string traj_file;
  double water_line_y = 0.0;
  double px_per_meter = 0.0;
  auto* metrics_cmd = app.add_subcommand("metrics", "dive metrics from a trajectory CSV");
  metrics_cmd->add_option("trajectory", traj_file, "trajectory.csv")->required();
  metrics_cmd->add_option("--water-line-y", water_line_y, "water line, panorama px")
      ->required();
  metrics_cmd->add_option("--px-per-meter", px_per_meter, "metric scale");

  int synth_frames = 60;
  double pan_x = 300.0, pan_y = 0.0, jitter = 2.0, synth_fps = 20.0;
  uint64_t synth_seed = 7;
  bool no_subject = false;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dive scene");
  synth_cmd->add_option("-o,--out", out_dir, "output directory");
  synth_cmd->add_option("--frames", synth_frames)->capture_default_str();
  synth_cmd->add_option("--pan-x", pan_x, "total horizontal pan, px")
      ->capture_default_str();
  synth_cmd->add_option("--pan-y", pan_y)->capture_default_str();
  synth_cmd->add_option("--jitter", jitter, "uniform jitter amplitude, px")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_seed)->capture_default_str();
  synth_cmd->add_option("--fps", synth_fps)->capture_default_str();
  synth_cmd->add_flag("--no-subject", no_subject);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(synth_cmd)) {
      run_synth(out_dir, synth_frames, pan_x, pan_y, jitter, synth_seed, no_subject,
                synth_fps);
      return 0;
    }
    if (app.got_subcommand(metrics_cmd)) {
      std::ifstream in(traj_file);
      if (!in) throw InputError("cannot read " + traj_file);
      std::ostringstream text;
      text << in.rdbuf();
      const Trajectory traj = trajectory_from_csv(text.str());
      std::optional<double> ppm;
      if (px_per_meter > 0.0) ppm = px_per_meter;
      std::cout << metrics_report(metrics(traj, water_line_y, ppm));
      return 0;
    }

    const CLI::App* active = app.get_subcommands().front();
    const PipelineConfig cfg = effective_config(active, opts);
    if (opts.dump) {
      std::cout << dump_config(cfg);
      return 0;
    }
    cfg.validate();
    if (app.got_subcommand(mosaic_cmd)) {
      cmd_mosaic(input_dir, out_dir, cfg);
    } else if (app.got_subcommand(track_cmd)) {
      cmd_track(input_dir, out_dir, cfg);
    } else if (app.got_subcommand(compare_cmd)) {
      cmd_compare_detectors(input_dir, compare_out, cfg);
    }
    return 0;
  } catch (const EmptyResultError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
