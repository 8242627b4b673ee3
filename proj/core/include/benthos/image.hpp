#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace benthos {

using Rgb = std::array<std::uint8_t, 3>;

/// Interleaved 8-bit RGB raster, row-major, origin top-left.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(std::size_t width, std::size_t height, Rgb fill = {0, 0, 0});

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }

  Rgb at(std::size_t row, std::size_t col) const;
  void set(std::size_t row, std::size_t col, Rgb value);

  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

  /// Copy of the rectangle [col, col+w) x [row, row+h), clipped to the image.
  RgbImage crop(std::size_t col, std::size_t row, std::size_t w,
                std::size_t h) const;

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> bytes_;
};

/// Binary PPM (P6, maxval 255).
void write_ppm(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_ppm(const std::filesystem::path& path);

}  // namespace benthos
