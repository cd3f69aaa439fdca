// 8-bit RGB rasters and Netpbm (PGM / PPM) input and output.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "deeprare/tensor.hpp"

namespace deeprare {

/// Interleaved 8-bit RGB, row-major.
struct RgbImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> data;  // height * width * 3

  RgbImage() = default;
  RgbImage(std::size_t h, std::size_t w, std::uint8_t fill = 0)
      : height(h), width(w), data(h * w * 3, fill) {}

  std::uint8_t* pixel(std::size_t row, std::size_t col) noexcept {
    return data.data() + (row * width + col) * 3;
  }
  const std::uint8_t* pixel(std::size_t row, std::size_t col) const noexcept {
    return data.data() + (row * width + col) * 3;
  }
  bool operator==(const RgbImage&) const = default;
};

class NetpbmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quantizes clamp(v, 0, 1) * 255 with rounding; binary P5, maxval 255.
void write_pgm(const Map2D& m, const std::filesystem::path& path);
void write_ppm(const RgbImage& img, const std::filesystem::path& path);

/// Reads P2 / P5 (maxval up to 65535), scaled to [0, 1].
Map2D read_pgm(const std::filesystem::path& path);
/// Reads P3 / P6; maxval other than 255 is rescaled to 8 bits.
RgbImage read_ppm(const std::filesystem::path& path);

}  // namespace deeprare
