#include "deeprare/rarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deeprare {

BinEdges::BinEdges(double lo, double hi, int n_bins)
    : lo_(lo), range_(hi - lo), scale_(0.0), n_bins_(n_bins) {
  if (n_bins < 2) {
    throw std::invalid_argument("rarity: n_bins must be >= 2");
  }
  if (hi < lo) {
    throw std::invalid_argument("rarity: hi < lo");
  }
  edges_.resize(static_cast<std::size_t>(n_bins) + 1);
  for (int k = 0; k < n_bins; ++k) {
    edges_[static_cast<std::size_t>(k)] =
        lo + range_ * static_cast<double>(k) / static_cast<double>(n_bins);
  }
  edges_.back() = hi;
  if (range_ > 0.0) scale_ = static_cast<double>(n_bins) / range_;
}

double self_information(std::size_t count, std::size_t total,
                        LogBase base) noexcept {
  if (count == 0 || total == 0) return 0.0;
  const double p = static_cast<double>(count) / static_cast<double>(total);
  return base == LogBase::natural ? -std::log(p) : -std::log2(p);
}

RarityHistogram rarity_histogram(const Map2D& f, int n_bins, LogBase base) {
  if (f.empty()) throw std::invalid_argument("rarity: empty map");
  const auto v = f.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const BinEdges edges(*lo, *hi, n_bins);

  RarityHistogram h;
  h.n_bins = n_bins;
  h.bin_edges.assign(edges.edges().begin(), edges.edges().end());
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);
  for (double x : v) ++h.counts[static_cast<std::size_t>(edges.bin_of(x))];

  const std::size_t total = v.size();
  h.p.resize(h.counts.size());
  h.rarity.resize(h.counts.size());
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    h.p[b] = static_cast<double>(h.counts[b]) / static_cast<double>(total);
    h.rarity[b] = self_information(h.counts[b], total, base);
  }
  return h;
}

RarityMap feature_map_rarity(const Map2D& f, int n_bins, LogBase base) {
  if (f.empty()) throw std::invalid_argument("rarity: empty map");
  const auto v = f.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const BinEdges edges(*lo, *hi, n_bins);

  std::vector<int> bins(v.size());
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_bins), 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    bins[i] = edges.bin_of(v[i]);
    ++counts[static_cast<std::size_t>(bins[i])];
  }
  std::vector<double> rarity(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    rarity[b] = self_information(counts[b], v.size(), base);
  }

  RarityMap out{Map2D(f.height(), f.width()), 0.0};
  auto o = out.map.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    o[i] = rarity[static_cast<std::size_t>(bins[i])];
  }
  return out;
}

RarityMap apply_rarity_threshold(const RarityMap& r, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("rarity threshold must be in [0, 1)");
  }
  if (threshold == 0.0) return {r.map, 0.0};
  const Map2D normalized = normalize_01(r.map);
  RarityMap out{r.map, threshold};
  auto o = out.map.values();
  const auto n = normalized.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (n[i] < threshold) o[i] = 0.0;
  }
  return out;
}

}  // namespace deeprare
