#include "deeprare/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deeprare {

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
  }
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double x = static_cast<double>(i);
    const double w = std::exp(-(x * x) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

Map2D gaussian_smooth(const Map2D& m, double sigma) {
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument("gaussian_smooth: sigma must be >= 0");
  }
  if (sigma == 0.0) return m;
  const auto kernel = gaussian_kernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto h = static_cast<std::ptrdiff_t>(m.height());
  const auto w = static_cast<std::ptrdiff_t>(m.width());

  // Horizontal pass over an edge-replicated row buffer.
  Map2D tmp(m.height(), m.width());
  std::vector<double> line(static_cast<std::size_t>(w + 2 * radius));
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t i = 0; i < w + 2 * radius; ++i) {
      const std::ptrdiff_t c = std::clamp<std::ptrdiff_t>(i - radius, 0, w - 1);
      line[static_cast<std::size_t>(i)] = m(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    }
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      double acc = 0.0;
      const double* src = line.data() + c;
      for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * src[k];
      tmp(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
    }
  }

  // Vertical pass, accumulating whole rows for locality.
  Map2D out(m.height(), m.width());
  const auto width = static_cast<std::size_t>(w);
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    double* dst = out.values().data() + static_cast<std::size_t>(r) * width;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
      const std::ptrdiff_t rr = std::clamp<std::ptrdiff_t>(r + k, 0, h - 1);
      const double weight = kernel[static_cast<std::size_t>(k + radius)];
      const double* src = tmp.values().data() + static_cast<std::size_t>(rr) * width;
      for (std::size_t c = 0; c < width; ++c) dst[c] += weight * src[c];
    }
  }
  return out;
}

Map2D finalize(const Map2D& m, const PostprocessConfig& cfg,
               std::size_t image_width) {
  if (!(cfg.sigma_fraction >= 0.0)) {
    throw std::invalid_argument("finalize: sigma_fraction must be >= 0");
  }
  Map2D out = gaussian_smooth(m, cfg.sigma_fraction * static_cast<double>(image_width));
  if (cfg.square) {
    for (double& v : out.values()) v *= v;
  }
  return normalize_01(out);
}

}  // namespace deeprare
