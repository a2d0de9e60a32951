#include "divetrack/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "divetrack/image_io.hpp"

namespace fs = std::filesystem;

namespace divetrack {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

int resolve_reference(const std::string& policy, int n_frames) {
  if (policy == "middle") return n_frames / 2;
  if (policy == "first") return 0;
  try {
    const int idx = std::stoi(policy);
    if (idx >= 0 && idx < n_frames) return idx;
  } catch (...) {
  }
  throw Error("bad reference policy '" + policy + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  detector_from_string(detector);
  if (fast_threshold <= 0.0 || fast_threshold >= 1.0)
    throw Error("fast_threshold must be in (0,1)");
  if (harris_k < 0.02 || harris_k > 0.15) throw Error("harris_k must be in [0.02,0.15]");
  if (harris_rel_threshold <= 0.0 || harris_rel_threshold >= 1.0)
    throw Error("harris_rel_threshold must be in (0,1)");
  if (max_keypoints < 10) throw Error("max_keypoints must be >= 10");
  if (ratio <= 0.0 || ratio > 1.0) throw Error("ratio must be in (0,1]");
  if (ransac_iters < 1) throw Error("ransac_iters must be >= 1");
  if (ransac_tol <= 0.0) throw Error("ransac_tol must be > 0");
  if (fps <= 0.0 || sample_fps <= 0.0 || sample_fps > fps)
    throw Error("need 0 < sample_fps <= fps");
  if (hsv.s_low > hsv.s_high || hsv.v_low > hsv.v_high)
    throw Error("hsv range: s_low <= s_high and v_low <= v_high required");
  if (min_area < 1) throw Error("min_area must be >= 1");
  if (guard_dilate < 0) throw Error("guard_dilate must be >= 0");
  if (max_gap < 0) throw Error("max_gap must be >= 0");
  if (window < 1 || window % 2 == 0) throw Error("window must be odd and >= 1");
}

PipelineConfig parse_config_text(const std::string& text, PipelineConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    auto d = [&val, lineno] {
      try {
        size_t used = 0;
        const double v = std::stod(val, &used);
        if (used != val.size()) throw Error("");
        return v;
      } catch (...) {
        throw Error("config line " + std::to_string(lineno) + ": bad number '" + val + "'");
      }
    };
    auto i = [&d] { return int(std::lround(d())); };
    if (key == "detector") base.detector = val;
    else if (key == "fast_threshold") base.fast_threshold = d();
    else if (key == "harris_k") base.harris_k = d();
    else if (key == "harris_rel_threshold") base.harris_rel_threshold = d();
    else if (key == "doh_threshold") base.doh_threshold = d();
    else if (key == "max_keypoints") base.max_keypoints = i();
    else if (key == "ratio") base.ratio = d();
    else if (key == "ransac_iters") base.ransac_iters = i();
    else if (key == "ransac_tol") base.ransac_tol = d();
    else if (key == "seed") base.seed = uint64_t(std::llround(d()));
    else if (key == "reference") base.reference = val;
    else if (key == "fps") base.fps = d();
    else if (key == "sample_fps") base.sample_fps = d();
    else if (key == "h_low") base.hsv.h_low = d();
    else if (key == "h_high") base.hsv.h_high = d();
    else if (key == "s_low") base.hsv.s_low = d();
    else if (key == "s_high") base.hsv.s_high = d();
    else if (key == "v_low") base.hsv.v_low = d();
    else if (key == "v_high") base.hsv.v_high = d();
    else if (key == "min_area") base.min_area = std::llround(d());
    else if (key == "guard_dilate") base.guard_dilate = i();
    else if (key == "max_gap") base.max_gap = i();
    else if (key == "window") base.window = i();
    else if (key == "water_line_y") base.water_line_y = d();
    else if (key == "px_per_meter") base.px_per_meter = d();
    else if (key == "annotate") base.annotate = val == "1" || val == "true";
    else if (key == "threads") base.threads = i();
    else throw Error("unknown config key '" + key + "'");
  }
  return base;
}

PipelineConfig load_config_file(const std::string& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), base);
}

std::string dump_config(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "detector = " << cfg.detector << '\n'
      << "fast_threshold = " << fmt_double(cfg.fast_threshold) << '\n'
      << "harris_k = " << fmt_double(cfg.harris_k) << '\n'
      << "harris_rel_threshold = " << fmt_double(cfg.harris_rel_threshold) << '\n'
      << "doh_threshold = " << fmt_double(cfg.doh_threshold) << '\n'
      << "max_keypoints = " << cfg.max_keypoints << '\n'
      << "ratio = " << fmt_double(cfg.ratio) << '\n'
      << "ransac_iters = " << cfg.ransac_iters << '\n'
      << "ransac_tol = " << fmt_double(cfg.ransac_tol) << '\n'
      << "seed = " << cfg.seed << '\n'
      << "reference = " << cfg.reference << '\n'
      << "fps = " << fmt_double(cfg.fps) << '\n'
      << "sample_fps = " << fmt_double(cfg.sample_fps) << '\n'
      << "h_low = " << fmt_double(cfg.hsv.h_low) << '\n'
      << "h_high = " << fmt_double(cfg.hsv.h_high) << '\n'
      << "s_low = " << fmt_double(cfg.hsv.s_low) << '\n'
      << "s_high = " << fmt_double(cfg.hsv.s_high) << '\n'
      << "v_low = " << fmt_double(cfg.hsv.v_low) << '\n'
      << "v_high = " << fmt_double(cfg.hsv.v_high) << '\n'
      << "min_area = " << cfg.min_area << '\n'
      << "guard_dilate = " << cfg.guard_dilate << '\n'
      << "max_gap = " << cfg.max_gap << '\n'
      << "window = " << cfg.window << '\n'
      << "water_line_y = " << fmt_double(cfg.water_line_y) << '\n';
  if (cfg.px_per_meter) out << "px_per_meter = " << fmt_double(*cfg.px_per_meter) << '\n';
  out << "annotate = " << (cfg.annotate ? 1 : 0) << '\n'
      << "threads = " << cfg.threads << '\n';
  return out.str();
}

MosaicResult run_mosaic(const FrameSequence& frames, const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  const int n = int(frames.frames.size());
  if (n < 2) throw NoFrames("need at least 2 frames");
  const DetectorKind kind = detector_from_string(cfg.detector);

  std::vector<GrayImage> gray(n);
  std::vector<std::vector<Keypoint>> kps(n);
  std::vector<std::vector<Descriptor>> desc(n);
  std::string stage_error;
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    try {
      gray[k] = to_grayscale(frames.frames[k]);
      kps[k] = strongest(detect(gray[k], kind, cfg.fast_threshold, cfg.harris_k,
                                cfg.harris_rel_threshold, cfg.doh_threshold),
                         size_t(cfg.max_keypoints));
      desc[k] = describe(gray[k], kps[k]).descriptors;
    } catch (const std::exception& e) {
#pragma omp critical
      if (stage_error.empty())
        stage_error = "frame " + std::to_string(k) + ": " + e.what();
    }
  }
  if (!stage_error.empty()) throw Error(stage_error);

  // Pairwise transforms: frame i+1 coords -> frame i coords.
  std::vector<AffineTransform2D> pairwise(n - 1);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n - 1; ++i) {
    try {
      const auto matches = match_descriptors(desc[i + 1], desc[i], cfg.ratio);
      std::vector<PointPair> pairs;
      pairs.reserve(matches.size());
      for (const auto& m : matches) {
        const auto& ka = kps[i + 1][desc[i + 1][m.index_a].keypoint_index];
        const auto& kb = kps[i][desc[i][m.index_b].keypoint_index];
        pairs.push_back({{ka.x, ka.y}, {kb.x, kb.y}});
      }
      pairwise[i] = estimate_affine_ransac(pairs, cfg.ransac_iters, cfg.ransac_tol,
                                           cfg.seed + uint64_t(i))
                        .transform;
    } catch (const std::exception& e) {
#pragma omp critical
      if (stage_error.empty())
        stage_error = "frame pair " + std::to_string(i) + "-" +
                      std::to_string(i + 1) + ": " + e.what();
    }
  }
  if (!stage_error.empty()) throw Error(stage_error);

  MosaicResult res;
  const int fw = frames.frames[0].width, fh = frames.frames[0].height;
  const double diagonal = std::hypot(double(fw), double(fh));
  res.path = chain_to_reference(pairwise, resolve_reference(cfg.reference, n), diagonal);
  res.extent = panorama_extent(res.path, fw, fh);
  res.displacement = camera_displacement(res.path, fw, fh);

  res.registered.resize(n);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k)
    res.registered[k] = project_frame(k, res.path, res.extent, frames.frames[k]);

  res.panorama = composite_background(res.registered, res.extent);
  return res;
}

namespace {

// Color filter of a registered frame: set only where the frame wrote pixels.
BinaryMask threshold_registered(const RegisteredFrame& rf, const HsvRange& range) {
  BinaryMask mask(rf.mask.width, rf.mask.height);
  if (rf.box_w == 0) return mask;
#pragma omp parallel for schedule(static)
  for (int y = rf.y0; y < rf.y0 + rf.box_h; ++y)
    for (int x = rf.x0; x < rf.x0 + rf.box_w; ++x) {
      if (!rf.mask.get(x, y)) continue;
      const uint8_t* p = rf.at(x, y);
      mask.set(x, y, hsv_in_range(rgb_to_hsv(p[0], p[1], p[2]), range));
    }
  return mask;
}

}  // namespace

TrackResult run_track(const FrameSequence& frames, const PipelineConfig& cfg) {
  TrackResult res;
  res.mosaic = run_mosaic(frames, cfg);
  const auto& mos = res.mosaic;
  const int n = int(frames.frames.size());

  // Filtered panorama; zero-coverage pixels have nothing to subtract.
  BinaryMask bg_mask = hsv_threshold(mos.panorama.image, cfg.hsv);
  for (size_t i = 0; i < bg_mask.bits.size(); ++i)
    if (mos.panorama.coverage[i] == 0) bg_mask.bits[i] = 0;
  const BinaryMask guard = dilate(bg_mask, cfg.guard_dilate);

  std::vector<std::vector<Component>> comps(n);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    BinaryMask fm = threshold_registered(mos.registered[k], cfg.hsv);
    for (size_t i = 0; i < fm.bits.size(); ++i)
      if (guard.bits[i]) fm.bits[i] = 0;
    comps[k] = connected_components(fm);
  }

  // Subject selection is sequential: ties break toward the previous
  // barycentre.
  std::vector<BarycenterSample> samples(n);
  res.subject_pixels.resize(n);
  std::optional<Point2> previous;
  for (int k = 0; k < n; ++k) {
    BarycenterSample s;
    s.frame_index = k;
    s.t = frames.timestamps[k];
    try {
      const Component& c = select_subject(comps[k], cfg.min_area, previous);
      const Point2 b = barycenter(c);
      s.x = b.x;
      s.y = b.y;
      s.area = c.area;
      s.valid = true;
      previous = b;
      res.subject_pixels[k] = c.pixels;
    } catch (const NoSubject&) {
      s.valid = false;
    }
    samples[k] = s;
  }

  res.trajectory = smooth(assemble(samples, cfg.max_gap), cfg.window);
  const double water_line =
      cfg.water_line_y >= 0.0 ? cfg.water_line_y : double(mos.extent.height - 1);
  res.dive = metrics(res.trajectory, water_line, cfg.px_per_meter);
  return res;
}

std::vector<DetectorComparison> run_compare_detectors(const FrameSequence& frames,
                                                      const PipelineConfig& cfg) {
  cfg.validate();
  const int n = int(frames.frames.size());
  if (n < 2) throw NoFrames("need at least 2 frames");

  std::vector<GrayImage> gray(n);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) gray[k] = to_grayscale(frames.frames[k]);

  std::vector<DetectorComparison> rows;
  for (const DetectorKind kind :
       {DetectorKind::Fast, DetectorKind::Harris, DetectorKind::Doh}) {
    std::vector<std::vector<Descriptor>> desc(n);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n; ++k) {
      const auto kps = strongest(
          detect(gray[k], kind, cfg.fast_threshold, cfg.harris_k,
                 cfg.harris_rel_threshold, cfg.doh_threshold),
          size_t(cfg.max_keypoints));
      desc[k] = describe(gray[k], kps).descriptors;
    }
    long long total = 0;
    for (int i = 0; i < n - 1; ++i)
      total += (long long)match_descriptors(desc[i + 1], desc[i], cfg.ratio).size();
    rows.push_back({to_string(kind), double(total) / double(n - 1)});
  }
  return rows;
}

std::string camera_path_to_csv(const CameraPath& path) {
  std::ostringstream out;
  out << "frame,tx_px,ty_px,a11,a12,a21,a22\n";
  for (size_t k = 0; k < path.to_global.size(); ++k) {
    const auto& t = path.to_global[k];
    out << k << ',' << fmt_double(t.tx) << ',' << fmt_double(t.ty) << ','
        << fmt_double(t.a11) << ',' << fmt_double(t.a12) << ',' << fmt_double(t.a21)
        << ',' << fmt_double(t.a22) << '\n';
  }
  return out.str();
}

namespace {

void write_mosaic_outputs(const MosaicResult& mos, const std::string& out_dir) {
  fs::create_directories(out_dir);
  write_png(out_dir + "/panorama.png", mos.panorama.image);
  write_png16(out_dir + "/coverage.png", mos.panorama.coverage, mos.extent.width,
              mos.extent.height);
  write_text(out_dir + "/camera_path.csv", camera_path_to_csv(mos.path));
}

ImageBuffer annotate_frame(const RegisteredFrame& rf, const BarycenterSample& s,
                           const std::vector<int>& subject) {
  ImageBuffer img(rf.mask.width, rf.mask.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (rf.mask.get(x, y)) {
        const uint8_t* p = rf.at(x, y);
        uint8_t* q = img.at(x, y);
        q[0] = p[0];
        q[1] = p[1];
        q[2] = p[2];
      }
  // subject contour in white: member pixels with a non-member 8-neighbour
  if (!subject.empty()) {
    BinaryMask member(img.width, img.height);
    for (int idx : subject) member.bits[idx] = 1;
    for (int idx : subject) {
      const int x = idx % img.width, y = idx / img.width;
      bool boundary = false;
      for (int dy = -1; dy <= 1 && !boundary; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height ||
              !member.get(xx, yy)) {
            boundary = true;
            break;
          }
        }
      if (boundary) {
        uint8_t* q = img.at(x, y);
        q[0] = q[1] = q[2] = 255;
      }
    }
  }
  if (s.valid) {
    const int bx = int(std::lround(s.x)), by = int(std::lround(s.y));
    for (int dy = -3; dy <= 3; ++dy)
      for (int dx = -3; dx <= 3; ++dx) {
        const int x = bx + dx, y = by + dy;
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
        uint8_t* q = img.at(x, y);
        q[0] = 255;
        q[1] = 0;
        q[2] = 0;
      }
  }
  return img;
}

}  // namespace

void cmd_mosaic(const std::string& input_dir, const std::string& out_dir,
                const PipelineConfig& cfg) {
  const auto frames = load_sequence(input_dir, cfg.fps, cfg.sample_fps);
  for (const auto& w : frames.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const auto mos = run_mosaic(frames, cfg);
  for (const auto& w : mos.path.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  write_mosaic_outputs(mos, out_dir);
}

void cmd_track(const std::string& input_dir, const std::string& out_dir,
               const PipelineConfig& cfg) {
  const auto frames = load_sequence(input_dir, cfg.fps, cfg.sample_fps);
  for (const auto& w : frames.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const auto res = run_track(frames, cfg);
  write_mosaic_outputs(res.mosaic, out_dir);
  write_text(out_dir + "/trajectory.csv", trajectory_to_csv(res.trajectory));
  write_text(out_dir + "/plot.svg", trajectory_to_svg(res.trajectory));
  write_text(out_dir + "/metrics.txt", metrics_report(res.dive));
  if (cfg.annotate) {
    for (size_t k = 0; k < res.mosaic.registered.size(); ++k) {
      char name[64];
      std::snprintf(name, sizeof name, "/annotated_%06zu.png", k);
      write_png(out_dir + name,
                annotate_frame(res.mosaic.registered[k], res.trajectory.samples[k],
                               res.subject_pixels[k]));
    }
  }
}

void cmd_compare_detectors(const std::string& input_dir, const std::string& out_csv,
                           const PipelineConfig& cfg) {
  const auto frames = load_sequence(input_dir, cfg.fps, cfg.sample_fps);
  const auto rows = run_compare_detectors(frames, cfg);
  std::ostringstream out;
  out << "detector,mean_matches\n";
  for (const auto& r : rows) out << r.detector << ',' << fmt_double(r.mean_matches) << '\n';
  write_text(out_csv, out.str());
  std::fputs(out.str().c_str(), stdout);
}

}  // namespace divetrack
