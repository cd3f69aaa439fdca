#include "deeprare/fusion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "deeprare/feature_io.hpp"

namespace deeprare {

namespace {

constexpr int kMaxFastBins = 256;

void zero_border(Map2D& m, double margin) {
  const auto band = static_cast<std::size_t>(
      std::ceil(margin * static_cast<double>(std::min(m.height(), m.width()))));
  if (band == 0) return;
  for (std::size_t r = 0; r < m.height(); ++r) {
    const bool row_in_band = r < band || r + band >= m.height();
    for (std::size_t c = 0; c < m.width(); ++c) {
      if (row_in_band || c < band || c + band >= m.width()) m(r, c) = 0.0;
    }
  }
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto count = std::min<std::size_t>(workers, n);
    for (std::size_t k = 0; k < count; ++k) pool.emplace_back(body);
  }
  if (error) std::rethrow_exception(error);
}

struct WorkingGrid {
  std::size_t height;
  std::size_t width;
};

WorkingGrid working_grid(const FeatureStack& stack, const FusionConfig& cfg) {
  if (cfg.working_height != 0 && cfg.working_width != 0) {
    return {cfg.working_height, cfg.working_width};
  }
  return {stack.image_height, stack.image_width};
}

void run_pipeline(const FeatureStack& stack, const FusionConfig& cfg,
                  Map2D& raw, Decomposition* keep) {
  validate_stack(stack);
  validate(cfg);
  if (cfg.use_face && stack.backbone != Backbone::vgg16) {
    throw std::invalid_argument("face channel is only available for VGG16");
  }
  const auto [height, width] = working_grid(stack, cfg);
  const std::size_t n_thresholds = cfg.thresholds.size();

  std::optional<Map2D> face;
  if (cfg.use_face) face = face_map(stack, cfg, height, width);

  // dgcms[t][g]
  std::vector<std::vector<ConspicuityMap>> dgcms(n_thresholds);
  if (keep) {
    keep->passes.assign(n_thresholds, ThresholdPass{});
    for (std::size_t t = 0; t < n_thresholds; ++t) {
      keep->passes[t].threshold = cfg.thresholds[t];
    }
  }

  const LayerSelection table = layer_selection(stack.backbone);
  std::size_t first = 0;
  for (int g = 1; g <= 5; ++g) {
    const std::size_t n_layers = table.groups[static_cast<std::size_t>(g - 1)].size();
    // dlcms[layer][threshold]
    std::vector<std::vector<ConspicuityMap>> dlcms(n_layers);
    parallel_for(n_layers, cfg.workers, [&](std::size_t l) {
      dlcms[l] = layer_conspicuities(stack.tensors[first + l], cfg.thresholds,
                                     cfg.n_bins, height, width, cfg.log_base);
    });
    first += n_layers;

    for (std::size_t t = 0; t < n_thresholds; ++t) {
      std::vector<ConspicuityMap> of_group;
      of_group.reserve(n_layers);
      for (auto& per_layer : dlcms) of_group.push_back(std::move(per_layer[t]));
      dgcms[t].push_back(group_conspicuity(g, of_group));
      if (keep) {
        auto& layers = keep->passes[t].layers;
        std::move(of_group.begin(), of_group.end(), std::back_inserter(layers));
      }
    }
  }

  Map2D sum(height, width);
  for (std::size_t t = 0; t < n_thresholds; ++t) {
    Map2D combined = combine_groups(dgcms[t], cfg, face ? &*face : nullptr,
                                    stack.backbone);
    auto s = sum.values();
    const auto c = combined.values();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += c[i];
    if (keep) {
      keep->passes[t].groups = std::move(dgcms[t]);
      keep->passes[t].combined = std::move(combined);
    }
  }
  const auto count = static_cast<double>(n_thresholds);
  for (double& v : sum.values()) v /= count;
  raw = normalize_01(sum);
}

}  // namespace

std::array<double, 5> linear_group_weights() noexcept {
  return {1.0 / 15.0, 2.0 / 15.0, 3.0 / 15.0, 4.0 / 15.0, 5.0 / 15.0};
}

void validate(const FusionConfig& cfg) {
  if (cfg.thresholds.empty()) {
    throw std::invalid_argument("fusion: at least one threshold required");
  }
  for (double t : cfg.thresholds) {
    if (!(t >= 0.0 && t < 1.0)) {
      throw std::invalid_argument("fusion: thresholds must lie in [0, 1)");
    }
  }
  for (double w : cfg.group_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("fusion: group weights must be > 0");
    }
  }
  if (!(cfg.border_margin >= 0.0 && cfg.border_margin <= 0.25)) {
    throw std::invalid_argument("fusion: border_margin must lie in [0, 0.25]");
  }
  if ((cfg.working_height == 0) != (cfg.working_width == 0)) {
    throw std::invalid_argument("fusion: set both working dims or neither");
  }
  if (cfg.n_bins < 2 || cfg.n_bins > kMaxFastBins) {
    throw std::invalid_argument("fusion: n_bins must lie in [2, 256]");
  }
}

double itti_weight(const Map2D& m) {
  const MapStats s = map_stats(m);
  const double d = s.max - s.mean;
  return d * d;
}

Map2D fuse_maps(std::span<const Map2D> maps) {
  if (maps.empty()) throw std::invalid_argument("fuse_maps: no maps");
  for (const Map2D& m : maps) {
    if (!m.same_shape(maps.front())) {
      throw std::invalid_argument("fuse_maps: dimension mismatch");
    }
  }
  Map2D acc(maps.front().height(), maps.front().width());
  bool any = false;
  for (const Map2D& m : maps) {
    const Map2D n = normalize_01(m);
    const double w = itti_weight(n);
    if (w == 0.0) continue;
    any = true;
    auto a = acc.values();
    const auto v = n.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += w * v[i];
  }
  if (!any) return acc;
  return normalize_01(acc);
}

std::vector<ConspicuityMap> layer_conspicuities(
    const FeatureTensor& t, std::span<const double> thresholds, int n_bins,
    std::size_t working_height, std::size_t working_width, LogBase base) {
  if (n_bins < 2 || n_bins > kMaxFastBins) {
    throw std::invalid_argument("layer_conspicuity: n_bins must lie in [2, 256]");
  }
  for (double th : thresholds) {
    if (!(th >= 0.0 && th < 1.0)) {
      throw std::invalid_argument("rarity threshold must be in [0, 1)");
    }
  }
  const std::size_t channels = t.channels();
  const std::size_t pixels = t.height() * t.width();
  const auto nb = static_cast<std::size_t>(n_bins);
  const auto v = t.values();

  std::vector<double> lo(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(channels));
  std::vector<double> hi = lo;
  for (std::size_t p = 1; p < pixels; ++p) {
    const double* row = v.data() + p * channels;
    for (std::size_t c = 0; c < channels; ++c) {
      lo[c] = std::min(lo[c], row[c]);
      hi[c] = std::max(hi[c], row[c]);
    }
  }
  std::vector<BinEdges> edges;
  edges.reserve(channels);
  for (std::size_t c = 0; c < channels; ++c) edges.emplace_back(lo[c], hi[c], n_bins);

  // Per-pixel bin of every channel, plus per-channel bin occupancy.
  std::vector<std::uint8_t> bins(pixels * channels);
  std::vector<std::size_t> counts(channels * nb, 0);
  for (std::size_t p = 0; p < pixels; ++p) {
    const std::size_t base_idx = p * channels;
    for (std::size_t c = 0; c < channels; ++c) {
      const int b = edges[c].bin_of(v[base_idx + c]);
      bins[base_idx + c] = static_cast<std::uint8_t>(b);
      ++counts[c * nb + static_cast<std::size_t>(b)];
    }
  }
  std::vector<double> rarity(channels * nb);
  for (std::size_t k = 0; k < rarity.size(); ++k) {
    rarity[k] = self_information(counts[k], pixels, base);
  }

  // Every per-channel step (threshold, normalization, weighting) depends only
  // on the bin, so each channel reduces to a lookup table over its bins.
  std::vector<ConspicuityMap> out;
  out.reserve(thresholds.size());
  std::vector<double> lut(channels * nb);
  std::vector<double> kept(nb);
  for (double threshold : thresholds) {
    std::fill(lut.begin(), lut.end(), 0.0);
    bool any = false;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t* cnt = counts.data() + c * nb;
      const double* r = rarity.data() + c * nb;
      double r_lo = 0.0, r_hi = 0.0;
      bool first = true;
      for (std::size_t b = 0; b < nb; ++b) {
        if (cnt[b] == 0) continue;
        if (first) {
          r_lo = r_hi = r[b];
          first = false;
        } else {
          r_lo = std::min(r_lo, r[b]);
          r_hi = std::max(r_hi, r[b]);
        }
      }
      const double r_range = r_hi - r_lo;
      for (std::size_t b = 0; b < nb; ++b) {
        const double normalized = r_range > 0.0 ? (r[b] - r_lo) / r_range : 0.0;
        kept[b] = (threshold == 0.0 || normalized >= threshold) ? r[b] : 0.0;
      }
      double k_lo = 0.0, k_hi = 0.0;
      first = true;
      for (std::size_t b = 0; b < nb; ++b) {
        if (cnt[b] == 0) continue;
        if (first) {
          k_lo = k_hi = kept[b];
          first = false;
        } else {
          k_lo = std::min(k_lo, kept[b]);
          k_hi = std::max(k_hi, kept[b]);
        }
      }
      const double k_range = k_hi - k_lo;
      if (!(k_range > 0.0)) continue;
      double mean = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        if (cnt[b] == 0) continue;
        mean += static_cast<double>(cnt[b]) * ((kept[b] - k_lo) / k_range);
      }
      mean = std::clamp(mean / static_cast<double>(pixels), 0.0, 1.0);
      const double weight = (1.0 - mean) * (1.0 - mean);
      if (weight == 0.0) continue;
      any = true;
      for (std::size_t b = 0; b < nb; ++b) {
        lut[c * nb + b] = weight * ((kept[b] - k_lo) / k_range);
      }
    }

    Map2D fused(t.height(), t.width());
    if (any) {
      auto f = fused.values();
      for (std::size_t p = 0; p < pixels; ++p) {
        const std::uint8_t* pb = bins.data() + p * channels;
        double s = 0.0;
        for (std::size_t c = 0; c < channels; ++c) s += lut[c * nb + pb[c]];
        f[p] = s;
      }
      fused = normalize_01(fused);
    }
    out.push_back({Level::layer, t.layer_id(),
                   resize_bilinear(fused, working_height, working_width)});
  }
  return out;
}

ConspicuityMap layer_conspicuity(const FeatureTensor& t, double threshold,
                                 int n_bins, std::size_t working_height,
                                 std::size_t working_width, LogBase base) {
  const double th[] = {threshold};
  return std::move(
      layer_conspicuities(t, th, n_bins, working_height, working_width, base)
          .front());
}

ConspicuityMap group_conspicuity(int group_id,
                                 std::span<const ConspicuityMap> dlcms) {
  if (dlcms.empty()) {
    throw std::invalid_argument("group_conspicuity: no layer maps");
  }
  std::vector<Map2D> maps;
  maps.reserve(dlcms.size());
  for (const auto& d : dlcms) maps.push_back(d.map);
  return {Level::group, group_id, fuse_maps(maps)};
}

Map2D combine_groups(std::span<const ConspicuityMap> dgcms,
                     const FusionConfig& cfg, const Map2D* face,
                     Backbone backbone) {
  validate(cfg);
  std::array<const Map2D*, 5> by_group{};
  for (const auto& d : dgcms) {
    if (d.id < 1 || d.id > 5) {
      throw std::invalid_argument("combine_groups: group id out of range");
    }
    by_group[static_cast<std::size_t>(d.id - 1)] = &d.map;
  }
  for (int g = 0; g < 5; ++g) {
    if (by_group[static_cast<std::size_t>(g)] == nullptr) {
      throw std::invalid_argument("combine_groups: missing DGCM for group " +
                                  std::to_string(g + 1));
    }
  }
  const Map2D& ref = *by_group[0];
  for (const Map2D* m : by_group) {
    if (!m->same_shape(ref)) {
      throw std::invalid_argument("combine_groups: dimension mismatch");
    }
  }
  if (face != nullptr) {
    if (!cfg.use_face || backbone != Backbone::vgg16) {
      throw std::invalid_argument(
          "combine_groups: face map requires use_face and VGG16");
    }
    if (!face->same_shape(ref)) {
      throw std::invalid_argument("combine_groups: face map dimension mismatch");
    }
  }

  Map2D sum(ref.height(), ref.width());
  auto s = sum.values();
  for (std::size_t g = 0; g < 5; ++g) {
    const double w = cfg.group_weights[g];
    const auto v = by_group[g]->values();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += w * v[i];
  }
  if (face != nullptr) {
    const double w = std::accumulate(cfg.group_weights.begin(),
                                     cfg.group_weights.end(), 0.0) /
                     5.0;
    const Map2D f = normalize_01(*face);
    const auto v = f.values();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += w * v[i];
  }
  zero_border(sum, cfg.border_margin);
  return normalize_01(sum);
}

Map2D face_map(const FeatureStack& stack, const FusionConfig& cfg,
               std::size_t working_height, std::size_t working_width) {
  if (stack.backbone != Backbone::vgg16) {
    throw std::invalid_argument("face channel is only available for VGG16");
  }
  for (const FeatureTensor& t : stack.tensors) {
    if (t.layer_id() != cfg.face_layer) continue;
    if (cfg.face_channel >= t.channels()) {
      throw std::invalid_argument("face channel " +
                                  std::to_string(cfg.face_channel) +
                                  " out of range for layer " +
                                  std::to_string(t.layer_id()));
    }
    return resize_bilinear(normalize_01(t.channel(cfg.face_channel)),
                           working_height, working_width);
  }
  throw std::invalid_argument("face layer " + std::to_string(cfg.face_layer) +
                              " not in stack");
}

Map2D multi_threshold_saliency(const FeatureStack& stack,
                               const FusionConfig& cfg) {
  Map2D raw;
  run_pipeline(stack, cfg, raw, nullptr);
  return raw;
}

Decomposition decompose(const FeatureStack& stack, const FusionConfig& cfg) {
  Decomposition d;
  run_pipeline(stack, cfg, d.raw, &d);
  return d;
}

}  // namespace deeprare
