#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace nqprobe {

enum class PixelMode { kInteger, kFractional };

// H x W x 3 raster in level units, row-major with interleaved channels.
//
// Integer mode stores 8-bit levels; fractional mode stores doubles in
// [0, 256). Both are immutable after construction.
class ImageBuffer {
 public:
  static constexpr std::size_t kChannels = 3;

  ImageBuffer() = default;

  // Throws InvalidInput unless data.size() == height * width * 3.
  static ImageBuffer from_levels(std::size_t height, std::size_t width,
                                 std::vector<std::uint8_t> data);
  // Throws InvalidInput on a size mismatch or a value outside [0, 256).
  static ImageBuffer from_fractional(std::size_t height, std::size_t width,
                                     std::vector<double> data);
  static ImageBuffer constant_levels(std::size_t height, std::size_t width,
                                     std::uint8_t value);
  static ImageBuffer constant_fractional(std::size_t height, std::size_t width,
                                         double value);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return height_ * width_ * kChannels; }
  std::size_t pixel_count() const noexcept { return height_ * width_; }
  bool empty() const noexcept { return size() == 0; }
  PixelMode mode() const noexcept { return mode_; }
  bool is_integer() const noexcept { return mode_ == PixelMode::kInteger; }

  // Element `i` of the interleaved buffer, in level units.
  double value(std::size_t i) const noexcept {
    return is_integer() ? static_cast<double>(levels_[i]) : fractional_[i];
  }
  double at(std::size_t row, std::size_t col, std::size_t channel) const noexcept {
    return value((row * width_ + col) * kChannels + channel);
  }

  // Valid only in the matching mode; empty span otherwise.
  std::span<const std::uint8_t> levels() const noexcept { return levels_; }
  std::span<const double> fractional() const noexcept { return fractional_; }

  // Integer levels, flooring fractional values.
  std::vector<std::uint8_t> floored_levels() const;

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  PixelMode mode_ = PixelMode::kInteger;
  std::vector<std::uint8_t> levels_;
  std::vector<double> fractional_;
};

// 8-bit RGB(A)/gray PNG or binary PPM (P6, maxval 255). Alpha is dropped and
// gray is replicated to three channels.
ImageBuffer read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, std::size_t height,
               std::size_t width, std::span<const std::uint8_t> rgb);
void write_png(const std::filesystem::path& path, const ImageBuffer& image);

}  // namespace nqprobe
