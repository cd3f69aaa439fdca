#include "deeprare/toy_backbone.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "deeprare/postprocess.hpp"

namespace deeprare {

namespace {

constexpr double kEdgeSigma = 1.0;
constexpr double kPyramidSigma = 1.0;
constexpr double kPoolSigma = 2.0;

using Channels = std::array<Map2D, kToyChannels>;

Channels filter_bank(const RgbImage& img) {
  const std::size_t h = img.height;
  const std::size_t w = img.width;
  Map2D intensity(h, w);
  Map2D red_green(h, w);
  Map2D blue_yellow(h, w);
  Map2D diagonal(h, w);
  for (std::size_t i = 0; i < h * w; ++i) {
    const double r = img.data[3 * i] / 255.0;
    const double g = img.data[3 * i + 1] / 255.0;
    const double b = img.data[3 * i + 2] / 255.0;
    intensity[i] = std::max({r, g, b});
    red_green[i] = r - g;
    blue_yellow[i] = b - (r + g) / 2.0;
    // Unit-norm projection halfway between the two opponent axes.
    diagonal[i] = red_green[i] / std::numbers::sqrt2 + blue_yellow[i] / std::sqrt(1.5);
  }

  const Map2D smooth = gaussian_smooth(intensity, kEdgeSigma);
  Channels out;
  for (std::size_t k = 4; k < kToyChannels; ++k) out[k] = Map2D(h, w);
  constexpr double kDiag = std::numbers::sqrt2 / 2.0;
  for (std::size_t r = 0; r < h; ++r) {
    const std::size_t up = r == 0 ? 0 : r - 1;
    const std::size_t down = r + 1 == h ? r : r + 1;
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t left = c == 0 ? 0 : c - 1;
      const std::size_t right = c + 1 == w ? c : c + 1;
      const double gx = (smooth(r, right) - smooth(r, left)) / 2.0;
      const double gy = (smooth(down, c) - smooth(up, c)) / 2.0;
      const double e0 = std::abs(gx);
      const double e90 = std::abs(gy);
      const double e45 = std::abs(kDiag * (gx + gy));
      const double e135 = std::abs(kDiag * (gy - gx));
      // Each orientation minus its orthogonal, rectified.
      out[4](r, c) = std::max(0.0, e0 - e90);
      out[5](r, c) = std::max(0.0, e45 - e135);
      out[6](r, c) = std::max(0.0, e90 - e0);
      out[7](r, c) = std::max(0.0, e135 - e45);
    }
  }
  out[0] = std::move(intensity);
  out[1] = std::move(red_green);
  out[2] = std::move(blue_yellow);
  out[3] = std::move(diagonal);
  return out;
}

Channels map_channels(const Channels& in, auto&& fn) {
  Channels out;
  for (std::size_t k = 0; k < kToyChannels; ++k) out[k] = fn(in[k]);
  return out;
}

FeatureTensor pack(const Channels& ch, int layer_id, int group_id) {
  const std::size_t h = ch[0].height();
  const std::size_t w = ch[0].width();
  std::vector<double> data(h * w * kToyChannels);
  for (std::size_t p = 0; p < h * w; ++p) {
    for (std::size_t k = 0; k < kToyChannels; ++k) {
      data[p * kToyChannels + k] = ch[k][p];
    }
  }
  return FeatureTensor(layer_id, group_id, h, w, kToyChannels, std::move(data));
}

}  // namespace

FeatureStack extract_toy_features(const RgbImage& image) {
  if (image.height < kToyMinSide || image.width < kToyMinSide) {
    throw std::invalid_argument("toy backbone: image must be at least 32x32");
  }
  if (image.data.size() != image.height * image.width * 3) {
    throw std::invalid_argument("toy backbone: malformed RGB buffer");
  }
  FeatureStack stack;
  stack.backbone = Backbone::toy;
  stack.image_height = static_cast<std::uint32_t>(image.height);
  stack.image_width = static_cast<std::uint32_t>(image.width);

  Channels level = filter_bank(image);
  for (int g = 1; g <= 5; ++g) {
    if (g > 1) {
      const std::size_t h = (level[0].height() + 1) / 2;
      const std::size_t w = (level[0].width() + 1) / 2;
      level = map_channels(level, [&](const Map2D& m) {
        return resize_bilinear(gaussian_smooth(m, kPyramidSigma), h, w);
      });
    }
    stack.tensors.push_back(pack(level, 2 * g - 1, g));
    const Channels pooled = map_channels(
        level, [](const Map2D& m) { return gaussian_smooth(m, kPoolSigma); });
    stack.tensors.push_back(pack(pooled, 2 * g, g));
  }
  return stack;
}

}  // namespace deeprare
