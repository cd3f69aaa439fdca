// Histogram self-information ("rarity") of a feature map.
//
// Each map is binned over its own [min, max] range into equal-width bins
// (top bin right-closed). A bin's rarity is -log(p) of its occupancy and
// every pixel receives the rarity of its bin.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deeprare/tensor.hpp"

namespace deeprare {

inline constexpr int kDefaultBins = 11;

enum class LogBase { natural, two };

/// Equal-width bin edges over [lo, hi]; edges[k] = lo + (hi - lo) * k / n,
/// edges[n] = hi. Bin b holds edges[b] <= v < edges[b + 1], the last bin
/// also holds v == hi. A degenerate range puts everything in bin 0.
class BinEdges {
 public:
  BinEdges(double lo, double hi, int n_bins);

  int n_bins() const noexcept { return n_bins_; }
  std::span<const double> edges() const noexcept { return edges_; }

  int bin_of(double v) const noexcept {
    if (!(range_ > 0.0)) return 0;
    double guess = (v - lo_) * scale_;
    int b = guess <= 0.0 ? 0
            : guess >= static_cast<double>(n_bins_ - 1)
                ? n_bins_ - 1
                : static_cast<int>(guess);
    while (b > 0 && v < edges_[static_cast<std::size_t>(b)]) --b;
    while (b < n_bins_ - 1 && v >= edges_[static_cast<std::size_t>(b + 1)]) ++b;
    return b;
  }

 private:
  double lo_;
  double range_;
  double scale_;
  int n_bins_;
  std::vector<double> edges_;
};

/// -log(count / total) in the requested base; 0 for an empty bin.
double self_information(std::size_t count, std::size_t total,
                        LogBase base = LogBase::natural) noexcept;

struct RarityHistogram {
  int n_bins = kDefaultBins;
  std::vector<double> bin_edges;        // n_bins + 1 values
  std::vector<std::size_t> counts;
  std::vector<double> p;                // occupancy probability per bin
  std::vector<double> rarity;           // -log p, 0 for empty bins
};

RarityHistogram rarity_histogram(const Map2D& f, int n_bins = kDefaultBins,
                                 LogBase base = LogBase::natural);

struct RarityMap {
  Map2D map;
  double threshold_applied = 0.0;
};

/// Backprojects the bin rarities onto the pixels. Constant input -> zeros.
RarityMap feature_map_rarity(const Map2D& f, int n_bins = kDefaultBins,
                             LogBase base = LogBase::natural);

/// Keeps r's values where normalize_01(r) >= threshold, zero elsewhere.
/// Throws std::invalid_argument unless 0 <= threshold < 1.
RarityMap apply_rarity_threshold(const RarityMap& r, double threshold);

}  // namespace deeprare
