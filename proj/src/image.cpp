#include "nqprobe/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "nqprobe/error.hpp"

namespace nqprobe {

ImageBuffer ImageBuffer::from_levels(std::size_t height, std::size_t width,
                                     std::vector<std::uint8_t> data) {
  if (data.size() != height * width * kChannels) {
    throw InvalidInput("image data length does not match height*width*3");
  }
  ImageBuffer img;
  img.height_ = height;
  img.width_ = width;
  img.mode_ = PixelMode::kInteger;
  img.levels_ = std::move(data);
  return img;
}

ImageBuffer ImageBuffer::from_fractional(std::size_t height, std::size_t width,
                                         std::vector<double> data) {
  if (data.size() != height * width * kChannels) {
    throw InvalidInput("image data length does not match height*width*3");
  }
  for (double v : data) {
    if (!(v >= 0.0 && v < 256.0)) {
      throw InvalidInput("fractional image value outside [0,256): " +
                         std::to_string(v));
    }
  }
  ImageBuffer img;
  img.height_ = height;
  img.width_ = width;
  img.mode_ = PixelMode::kFractional;
  img.fractional_ = std::move(data);
  return img;
}

ImageBuffer ImageBuffer::constant_levels(std::size_t height, std::size_t width,
                                         std::uint8_t value) {
  return from_levels(height, width,
                     std::vector<std::uint8_t>(height * width * kChannels, value));
}

ImageBuffer ImageBuffer::constant_fractional(std::size_t height,
                                             std::size_t width, double value) {
  return from_fractional(height, width,
                         std::vector<double>(height * width * kChannels, value));
}

std::vector<std::uint8_t> ImageBuffer::floored_levels() const {
  if (is_integer()) return levels_;
  std::vector<std::uint8_t> out(fractional_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(std::floor(fractional_[i]));
  }
  return out;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_png_signature(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

ImageBuffer read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw InvalidInput("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InvalidInput("libpng initialization failed");
  }
  std::vector<std::uint8_t> rgb;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw InvalidInput("malformed PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY ||
      color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  rgb.resize(static_cast<std::size_t>(width) * height * 3);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = rgb.data() + static_cast<std::size_t>(y) * width * 3;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return ImageBuffer::from_levels(height, width, std::move(rgb));
}

std::string next_ppm_token(std::istream& in) {
  std::string token;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(c);
  }
  return token;
}

ImageBuffer read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  if (next_ppm_token(in) != "P6") {
    throw InvalidInput("unsupported image format: " + path.string());
  }
  std::size_t width = 0;
  std::size_t height = 0;
  int maxval = 0;
  try {
    width = std::stoul(next_ppm_token(in));
    height = std::stoul(next_ppm_token(in));
    maxval = std::stoi(next_ppm_token(in));
  } catch (const std::exception&) {
    throw InvalidInput("malformed PPM header: " + path.string());
  }
  if (maxval != 255) throw InvalidInput("PPM maxval must be 255");
  std::vector<std::uint8_t> rgb(width * height * 3);
  in.read(reinterpret_cast<char*>(rgb.data()),
          static_cast<std::streamsize>(rgb.size()));
  if (static_cast<std::size_t>(in.gcount()) != rgb.size()) {
    throw InvalidInput("truncated PPM: " + path.string());
  }
  return ImageBuffer::from_levels(height, width, std::move(rgb));
}

}  // namespace

ImageBuffer read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw InvalidInput("no such file: " + path.string());
  }
  return has_png_signature(path) ? read_png(path) : read_ppm(path);
}

void write_png(const std::filesystem::path& path, std::size_t height,
               std::size_t width, std::span<const std::uint8_t> rgb) {
  if (rgb.size() != height * width * 3) {
    throw InvalidInput("PNG buffer length does not match dimensions");
  }
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw InvalidInput("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw InvalidInput("libpng initialization failed");
  }
  std::vector<png_const_bytep> rows(height);
  for (std::size_t y = 0; y < height; ++y) rows[y] = rgb.data() + y * width * 3;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InvalidInput("PNG encoding failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  const auto levels = image.floored_levels();
  write_png(path, image.height(), image.width(), levels);
}

}  // namespace nqprobe
