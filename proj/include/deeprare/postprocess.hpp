// Final conditioning of the fused map: Gaussian smoothing, squaring,
// normalization.

#pragma once

#include <cstddef>
#include <vector>

#include "deeprare/tensor.hpp"

namespace deeprare {

struct PostprocessConfig {
  // Gaussian sigma as a fraction of the image width.
  double sigma_fraction = 0.035;
  bool square = true;
};

/// Sampled Gaussian, radius ceil(3 sigma), normalized to unit sum.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with edge replication. sigma == 0 is identity.
Map2D gaussian_smooth(const Map2D& m, double sigma);

/// Smooth (sigma = sigma_fraction * image_width), optionally square, and
/// normalize to [0, 1].
Map2D finalize(const Map2D& m, const PostprocessConfig& cfg,
               std::size_t image_width);

}  // namespace deeprare
