// A fixed analytic filter bank standing in for a CNN encoder so the whole
// pipeline runs without pretrained weights.
//
// Every layer has 8 channels computed once at full resolution:
//   0 intensity max(r, g, b)
//   1 red-green r - g
//   2 blue-yellow b - (r + g) / 2
//   3 the chroma axis halfway between 1 and 2
//   4..7 opponent edge energy at 0, 45, 90 and 135 degrees: each
//        orientation's gradient response minus its orthogonal's, rectified
// Group g (1..5) sees those responses reduced by 2^(g-1): each step smooths
// with sigma 1 and halves the grid (rounding up). Layer 2g-1 is the level
// itself and layer 2g the level pooled with sigma 2, so coarse groups
// respond to the texture of a region rather than to single edges.

#pragma once

#include <cstddef>

#include "deeprare/netpbm.hpp"
#include "deeprare/tensor.hpp"

namespace deeprare {

inline constexpr std::size_t kToyChannels = 8;
inline constexpr std::size_t kToyMinSide = 32;

/// Throws std::invalid_argument for images smaller than 32x32.
FeatureStack extract_toy_features(const RgbImage& image);

}  // namespace deeprare
