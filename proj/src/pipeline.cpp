#include "deeprare/pipeline.hpp"

namespace deeprare {

Map2D predict(const FeatureStack& stack, const PipelineConfig& cfg) {
  const Map2D raw = multi_threshold_saliency(stack, cfg.fusion);
  return finalize(raw, cfg.post, raw.width());
}

}  // namespace deeprare
