// Conspicuity fusion: thresholded rarity maps -> per-layer maps (DLCM) ->
// per-group maps (DGCM) -> one raw saliency map, averaged over thresholds.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "deeprare/rarity.hpp"
#include "deeprare/tensor.hpp"

namespace deeprare {

/// g / 15 for g = 1..5: higher groups weigh more.
std::array<double, 5> linear_group_weights() noexcept;

struct FusionConfig {
  std::vector<double> thresholds{0.0, 0.9};
  std::array<double, 5> group_weights = linear_group_weights();
  bool use_face = false;
  // Fraction of min(H, W) zeroed along every border of each pass.
  double border_margin = 0.05;
  // Zero means "use the image size recorded in the stack".
  std::size_t working_height = 0;
  std::size_t working_width = 0;
  int n_bins = kDefaultBins;
  LogBase log_base = LogBase::natural;
  // VGG16 face detector: raw activation of this layer / channel (0-based).
  int face_layer = 15;
  std::size_t face_channel = 105;
  // Threads used for the per-layer rarity passes.
  unsigned workers = 1;
};

/// Throws std::invalid_argument on an out-of-range field.
void validate(const FusionConfig& cfg);

enum class Level { layer, group, final };

struct ConspicuityMap {
  Level level = Level::layer;
  int id = 0;  // layer id for Level::layer, group id (1..5) for Level::group
  Map2D map;
};

/// (max - mean)^2 of a map already scaled to [0, 1].
double itti_weight(const Map2D& m);

/// Normalizes each map, weights it by itti_weight, sums and renormalizes.
/// All-zero weights give an all-zero map.
Map2D fuse_maps(std::span<const Map2D> maps);

/// DLCM of one layer at one threshold, resized to the working grid.
ConspicuityMap layer_conspicuity(const FeatureTensor& t, double threshold,
                                 int n_bins, std::size_t working_height,
                                 std::size_t working_width,
                                 LogBase base = LogBase::natural);

/// DLCMs for several thresholds sharing one rarity pass; one entry per
/// threshold, in order.
std::vector<ConspicuityMap> layer_conspicuities(
    const FeatureTensor& t, std::span<const double> thresholds, int n_bins,
    std::size_t working_height, std::size_t working_width,
    LogBase base = LogBase::natural);

ConspicuityMap group_conspicuity(int group_id,
                                 std::span<const ConspicuityMap> dlcms);

/// Weighted sum of the five DGCMs (plus the optional face map), border
/// band zeroed, normalized. `backbone` gates the face map to VGG16.
Map2D combine_groups(std::span<const ConspicuityMap> dgcms,
                     const FusionConfig& cfg, const Map2D* face,
                     Backbone backbone);

/// Raw face activation from the configured layer/channel, normalized and
/// resized to the working grid.
Map2D face_map(const FeatureStack& stack, const FusionConfig& cfg,
               std::size_t working_height, std::size_t working_width);

struct ThresholdPass {
  double threshold = 0.0;
  std::vector<ConspicuityMap> layers;
  std::vector<ConspicuityMap> groups;
  Map2D combined;
};

struct Decomposition {
  std::vector<ThresholdPass> passes;
  Map2D raw;
};

/// Full layer -> group -> combine pipeline per threshold, averaged and
/// normalized.
Map2D multi_threshold_saliency(const FeatureStack& stack,
                               const FusionConfig& cfg);

/// As multi_threshold_saliency, keeping every intermediate map.
Decomposition decompose(const FeatureStack& stack, const FusionConfig& cfg);

}  // namespace deeprare
