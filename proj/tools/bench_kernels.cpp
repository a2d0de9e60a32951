// Throughput comparison: OpenMP kernels vs the serial reference versions.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "divetrack/features.hpp"
#include "divetrack/mosaic.hpp"
#include "divetrack/reference.hpp"
#include "divetrack/segmentation.hpp"
#include "divetrack/synth.hpp"

using namespace divetrack;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-22s serial %8.2f ms   openmp %8.2f ms   speedup %.2fx\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads: %d, reps per kernel: %d\n", omp_get_max_threads(), reps);

  SceneSpec spec;
  spec.background_w = 1600;
  spec.background_h = 900;
  for (int k = 0; k < 12; ++k) spec.camera_path.push_back({40.0 + 20.0 * k, 60.0});
  spec.subject_x0 = 400;
  spec.subject_y0 = 500;
  spec.subject_vx = 120;
  spec.subject_vy = -200;
  spec.gravity = 400;
  const SynthScene scene = generate(spec);
  const ImageBuffer& img = scene.background;

  report("to_grayscale", time_ms([&] { reference::to_grayscale(img); }, reps),
         time_ms([&] { to_grayscale(img); }, reps));

  const HsvRange range;
  report("hsv_threshold", time_ms([&] { reference::hsv_threshold(img, range); }, reps),
         time_ms([&] { hsv_threshold(img, range); }, reps));

  const GrayImage gray = to_grayscale(img);
  report("detect_harris", time_ms([&] { reference::detect_harris(gray); }, reps),
         time_ms([&] { detect_harris(gray); }, reps));

  const AffineTransform2D shift{1.0, 0.02, -0.02, 1.0, 37.5, -12.25};
  PanoramaExtent extent;
  extent.width = img.width + 80;
  extent.height = img.height + 40;
  report("warp_frame",
         time_ms([&] { reference::warp_frame(img, shift, extent); }, reps),
         time_ms([&] { warp_frame(img, shift, extent); }, reps));

  std::vector<RegisteredFrame> registered;
  for (int k = 0; k < 9; ++k) {
    AffineTransform2D t = AffineTransform2D::translation(4.0 * k, 2.0 * k);
    registered.push_back(warp_frame(img, t, extent));
  }
  report("composite_background",
         time_ms([&] { reference::composite_background(registered, extent); }, reps),
         time_ms([&] { composite_background(registered, extent); }, reps));

  const auto kps = detect_harris(gray);
  const auto desc = describe(gray, kps).descriptors;
  report("match_descriptors",
         time_ms([&] { reference::match_descriptors(desc, desc); }, reps),
         time_ms([&] { match_descriptors(desc, desc); }, reps));

  const BinaryMask mask = hsv_threshold(img, range);
  report("dilate x4", time_ms([&] { reference::dilate(mask, 4); }, reps),
         time_ms([&] { dilate(mask, 4); }, reps));
  return 0;
}
