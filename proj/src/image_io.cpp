#include "divetrack/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace divetrack {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

ImageBuffer read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFrame("cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw UnreadableFrame("not a P6 PPM: " + path);
  auto next_token = [&in, &path]() {
    // skip whitespace and '#' comment lines
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        while ((c = in.get()) != EOF && c != '\n') {
        }
      } else if (!std::isspace(c)) {
        in.unget();
        break;
      }
    }
    long v = -1;
    in >> v;
    if (!in || v < 0) throw UnreadableFrame("bad PPM header: " + path);
    return v;
  };
  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (maxval != 255 || w <= 0 || h <= 0)
    throw UnreadableFrame("unsupported PPM (need maxval 255): " + path);
  in.get();  // single whitespace after maxval
  ImageBuffer img{int(w), int(h)};
  in.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
  if (in.gcount() != std::streamsize(img.pixels.size()))
    throw UnreadableFrame("truncated PPM: " + path);
  return img;
}

ImageBuffer read_png(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw UnreadableFrame("cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnreadableFrame("libpng init failed for " + path);
  }
  ImageBuffer img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnreadableFrame("PNG decode failed: " + path);
  }
  png_init_io(png, f.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
      png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const int w = int(png_get_image_width(png, info));
  const int h = int(png_get_image_height(png, info));
  img = ImageBuffer(w, h);
  rows.resize(h);
  for (int y = 0; y < h; ++y) rows[y] = img.pixels.data() + size_t(y) * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png_raw(const std::string& path, const uint8_t* data, int width, int height,
                   int color_type, int bit_depth) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw Error("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng init failed for " + path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encode failed: " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int channels = (color_type == PNG_COLOR_TYPE_RGB) ? 3 : 1;
  const size_t stride = size_t(width) * channels * (bit_depth / 8);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(data + size_t(y) * stride);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

ImageBuffer read_image(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".ppm") == 0)
    return read_ppm(path);
  return read_png(path);
}

void write_png(const std::string& path, const ImageBuffer& img) {
  write_png_raw(path, img.pixels.data(), img.width, img.height, PNG_COLOR_TYPE_RGB, 8);
}

void write_png(const std::string& path, const BinaryMask& mask) {
  std::vector<uint8_t> gray(mask.bits.size());
  for (size_t i = 0; i < gray.size(); ++i) gray[i] = mask.bits[i] ? 255 : 0;
  write_png_raw(path, gray.data(), mask.width, mask.height, PNG_COLOR_TYPE_GRAY, 8);
}

void write_png16(const std::string& path, const std::vector<uint16_t>& values,
                 int width, int height) {
  // PNG stores 16-bit samples big-endian.
  std::vector<uint8_t> raw(values.size() * 2);
  for (size_t i = 0; i < values.size(); ++i) {
    raw[i * 2] = uint8_t(values[i] >> 8);
    raw[i * 2 + 1] = uint8_t(values[i] & 0xff);
  }
  write_png_raw(path, raw.data(), width, height, PNG_COLOR_TYPE_GRAY, 16);
}

void write_ppm(const std::string& path, const ImageBuffer& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            std::streamsize(img.pixels.size()));
}

}  // namespace divetrack
