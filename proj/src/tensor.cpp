#include "deeprare/tensor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace deeprare {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": non-finite value");
    }
  }
}

// a + t (b - a), kept inside [min(a, b), max(a, b)]. Exact when a == b.
inline double lerp_clamped(double a, double b, double t) noexcept {
  const double v = a + t * (b - a);
  return std::clamp(v, std::min(a, b), std::max(a, b));
}

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double t;
};

std::vector<Tap> sample_taps(std::size_t src, std::size_t dst) {
  std::vector<Tap> taps(dst);
  for (std::size_t i = 0; i < dst; ++i) {
    double x = 0.0;
    if (dst == 1) {
      x = static_cast<double>(src - 1) / 2.0;
    } else {
      x = static_cast<double>(i * (src - 1)) / static_cast<double>(dst - 1);
    }
    auto lo = static_cast<std::size_t>(std::floor(x));
    lo = std::min(lo, src - 1);
    const std::size_t hi = std::min(lo + 1, src - 1);
    taps[i] = {lo, hi, x - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

Map2D::Map2D(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), data_(height * width, fill) {
  if (height == 0 || width == 0) {
    throw std::invalid_argument("Map2D: dimensions must be >= 1");
  }
  if (!std::isfinite(fill)) {
    throw std::invalid_argument("Map2D: non-finite fill value");
  }
}

Map2D::Map2D(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height == 0 || width == 0) {
    throw std::invalid_argument("Map2D: dimensions must be >= 1");
  }
  if (data_.size() != height * width) {
    throw std::invalid_argument("Map2D: data length != height * width");
  }
  require_finite(data_, "Map2D");
}

std::string_view to_string(Backbone b) noexcept {
  switch (b) {
    case Backbone::vgg16:
      return "vgg16";
    case Backbone::vgg19:
      return "vgg19";
    case Backbone::mobilenet_v2:
      return "mobilenetv2";
    case Backbone::toy:
      return "toy";
  }
  return "unknown";
}

Backbone parse_backbone(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "vgg16") return Backbone::vgg16;
  if (lower == "vgg19") return Backbone::vgg19;
  if (lower == "mobilenetv2" || lower == "mobilenet_v2") {
    return Backbone::mobilenet_v2;
  }
  if (lower == "toy") return Backbone::toy;
  throw std::invalid_argument("unknown backbone: " + std::string(name));
}

FeatureTensor::FeatureTensor(int layer_id, int group_id, std::size_t height,
                             std::size_t width, std::size_t channels,
                             std::vector<double> data)
    : layer_id_(layer_id),
      group_id_(group_id),
      height_(height),
      width_(width),
      channels_(channels),
      data_(std::move(data)) {
  if (group_id < 1 || group_id > 5) {
    throw std::invalid_argument("FeatureTensor: group_id must be in 1..5");
  }
  if (height == 0 || width == 0 || channels == 0) {
    throw std::invalid_argument("FeatureTensor: empty dimension");
  }
  if (data_.size() != height * width * channels) {
    throw std::invalid_argument("FeatureTensor: data length mismatch");
  }
  require_finite(data_, "FeatureTensor");
}

Map2D FeatureTensor::channel(std::size_t ch) const {
  if (ch >= channels_) {
    throw std::out_of_range("FeatureTensor::channel: index out of range");
  }
  std::vector<double> out(height_ * width_);
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = data_[p * channels_ + ch];
  }
  return Map2D(height_, width_, std::move(out));
}

Map2D resize_bilinear(const Map2D& m, std::size_t target_height,
                      std::size_t target_width) {
  if (target_height == 0 || target_width == 0) {
    throw std::invalid_argument("resize_bilinear: target must be >= 1");
  }
  if (target_height == m.height() && target_width == m.width()) {
    return m;
  }
  const auto rows = sample_taps(m.height(), target_height);
  const auto cols = sample_taps(m.width(), target_width);

  Map2D out(target_height, target_width);
  for (std::size_t r = 0; r < target_height; ++r) {
    const Tap& ry = rows[r];
    for (std::size_t c = 0; c < target_width; ++c) {
      const Tap& cx = cols[c];
      const double top = lerp_clamped(m(ry.lo, cx.lo), m(ry.lo, cx.hi), cx.t);
      const double bottom =
          lerp_clamped(m(ry.hi, cx.lo), m(ry.hi, cx.hi), cx.t);
      out(r, c) = lerp_clamped(top, bottom, ry.t);
    }
  }
  return out;
}

MapStats map_stats(const Map2D& m) {
  if (m.empty()) {
    throw std::invalid_argument("map_stats: empty map");
  }
  const auto v = m.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = std::clamp(sum / static_cast<double>(v.size()), *lo, *hi);
  return {*lo, *hi, mean};
}

Map2D normalize_01(const Map2D& m) {
  if (m.empty()) {
    throw std::invalid_argument("normalize_01: empty map");
  }
  const auto v = m.values();
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  Map2D out(m.height(), m.width());
  if (range > 0.0) {
    auto o = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) o[i] = (v[i] - lo) / range;
  }
  return out;
}

}  // namespace deeprare
