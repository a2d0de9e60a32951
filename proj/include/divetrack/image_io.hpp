#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "divetrack/raster.hpp"

namespace divetrack {

/// Reads an 8-bit PNG (gray, gray+alpha, RGB or RGBA; alpha dropped) or a
/// binary PPM (P6, maxval 255). Throws UnreadableFrame on failure.
ImageBuffer read_image(const std::string& path);

/// Writes 8-bit RGB PNG.
void write_png(const std::string& path, const ImageBuffer& img);

/// Writes a mask as 8-bit gray PNG, 0/255.
void write_png(const std::string& path, const BinaryMask& mask);

/// Writes 16-bit gray PNG (coverage maps).
void write_png16(const std::string& path, const std::vector<uint16_t>& values,
                 int width, int height);

/// Writes binary PPM (P6, maxval 255).
void write_ppm(const std::string& path, const ImageBuffer& img);

}  // namespace divetrack
