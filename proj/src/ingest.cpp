#include "divetrack/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "divetrack/image_io.hpp"

namespace fs = std::filesystem;

namespace divetrack {

FrameSequence load_sequence(const std::string& dir, double source_fps, double sample_fps) {
  if (sample_fps <= 0.0 || source_fps <= 0.0 || sample_fps > source_fps)
    throw BadRate("sample_fps must be in (0, source_fps]");

  std::vector<std::string> paths;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".ppm") paths.push_back(entry.path().string());
  }
  if (ec) throw NoFrames("cannot read directory " + dir);
  std::sort(paths.begin(), paths.end());
  if (paths.size() < 2) throw NoFrames("need at least 2 frames in " + dir);

  const int step = std::max(1, int(std::lround(source_fps / sample_fps)));

  FrameSequence seq;
  seq.source_fps = source_fps;
  seq.sample_fps = sample_fps;
  if (sample_fps < 6.0)
    seq.warnings.push_back("sample rate below the 6 Hz aliasing floor");

  const size_t retained = (paths.size() - 1) / size_t(step) + 1;
  seq.frames.resize(retained);
  seq.timestamps.resize(retained);

  std::string failure;
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < (long long)retained; ++k) {
    const std::string& p = paths[size_t(k) * step];
    try {
      seq.frames[k] = read_image(p);
    } catch (const std::exception&) {
#pragma omp critical
      if (failure.empty()) failure = p;
    }
    seq.timestamps[k] = double(k) / sample_fps;
  }
  if (!failure.empty()) throw UnreadableFrame("cannot decode " + failure);

  for (size_t k = 1; k < retained; ++k)
    if (!seq.frames[k].same_geometry(seq.frames[0]))
      throw MixedGeometry("frame geometry differs at " + paths[k * step]);
  return seq;
}

}  // namespace divetrack
