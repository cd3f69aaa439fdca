// Dense 2-D maps and H x W x C feature tensors.
//
// Everything downstream (rarity, fusion, post-processing, metrics) works on
// Map2D. Values are double precision; feature files carry float32 and are
// promoted on read.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deeprare {

/// Single-channel real-valued grid, row-major.
class Map2D {
 public:
  Map2D() = default;
  Map2D(std::size_t height, std::size_t width, double fill = 0.0);
  Map2D(std::size_t height, std::size_t width, std::vector<double> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t row, std::size_t col) noexcept {
    return data_[row * width_ + col];
  }
  double operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[row * width_ + col];
  }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool same_shape(const Map2D& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  bool operator==(const Map2D&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

enum class Backbone : std::uint32_t {
  vgg16 = 0,
  vgg19 = 1,
  mobilenet_v2 = 2,
  toy = 3,
};

std::string_view to_string(Backbone b) noexcept;
/// Accepts "vgg16", "vgg19", "mobilenetv2" / "mobilenet_v2", "toy" (any case).
Backbone parse_backbone(std::string_view name);

/// One backbone layer's activations, H x W x C with channels fastest.
class FeatureTensor {
 public:
  FeatureTensor() = default;
  FeatureTensor(int layer_id, int group_id, std::size_t height,
                std::size_t width, std::size_t channels,
                std::vector<double> data);

  int layer_id() const noexcept { return layer_id_; }
  int group_id() const noexcept { return group_id_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }

  double at(std::size_t row, std::size_t col, std::size_t ch) const noexcept {
    return data_[(row * width_ + col) * channels_ + ch];
  }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  /// Copies one channel out as a map.
  Map2D channel(std::size_t ch) const;

  bool operator==(const FeatureTensor&) const = default;

 private:
  int layer_id_ = 0;
  int group_id_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

/// Input to the saliency pipeline: the selected layers of one image.
struct FeatureStack {
  Backbone backbone = Backbone::toy;
  std::uint32_t image_height = 0;
  std::uint32_t image_width = 0;
  std::vector<FeatureTensor> tensors;

  bool operator==(const FeatureStack&) const = default;
};

struct MapStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

/// Corner-aligned bilinear resampling.
Map2D resize_bilinear(const Map2D& m, std::size_t target_height,
                      std::size_t target_width);

/// Min-max rescale to [0, 1]; a constant map becomes all zeros.
Map2D normalize_01(const Map2D& m);

MapStats map_stats(const Map2D& m);

}  // namespace deeprare
