// End-to-end prediction: fusion followed by post-processing.

#pragma once

#include "deeprare/fusion.hpp"
#include "deeprare/postprocess.hpp"
#include "deeprare/tensor.hpp"

namespace deeprare {

struct PipelineConfig {
  FusionConfig fusion;
  PostprocessConfig post;
};

/// Final saliency map at the working resolution, values in [0, 1].
Map2D predict(const FeatureStack& stack, const PipelineConfig& cfg = {});

}  // namespace deeprare
