// Slow reference implementations written independently of the library:
// no shared helpers, no sorting tricks, just the definitions.

#pragma once

#include <cmath>
#include <cstddef>
#include <set>
#include <vector>

#include "deeprare/metrics.hpp"
#include "deeprare/tensor.hpp"

namespace oracle {

using deeprare::FixationSet;
using deeprare::Map2D;

/// Per-pixel -log(count / total), counting same-bin pixels one by one.
inline Map2D rarity(const Map2D& f, int n_bins) {
  const std::size_t n = f.size();
  double lo = f[0], hi = f[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (f[i] < lo) lo = f[i];
    if (f[i] > hi) hi = f[i];
  }
  Map2D out(f.height(), f.width());
  if (hi == lo) return out;

  std::vector<double> edge(static_cast<std::size_t>(n_bins) + 1);
  for (int k = 0; k < n_bins; ++k) {
    edge[static_cast<std::size_t>(k)] =
        lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n_bins);
  }
  edge[static_cast<std::size_t>(n_bins)] = hi;

  std::vector<int> bin(n);
  for (std::size_t i = 0; i < n; ++i) {
    int b = 0;
    for (int k = 0; k < n_bins; ++k) {
      if (f[i] >= edge[static_cast<std::size_t>(k)]) b = k;
    }
    bin[i] = b;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) count += bin[j] == bin[i];
    out[i] = -std::log(static_cast<double>(count) / static_cast<double>(n));
  }
  return out;
}

/// ROC area with one operating point per distinct fixated value, TPR over
/// fixated pixels and FPR over the rest, counted by a full scan each time.
inline double auc_judd(const Map2D& pred, const FixationSet& fx) {
  std::vector<bool> fixated(pred.size(), false);
  for (const auto& f : fx) fixated[f.row * pred.width() + f.col] = true;
  std::set<double> levels;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (fixated[i]) {
      levels.insert(pred[i]);
      ++n_pos;
    }
  }
  const std::size_t n_neg = pred.size() - n_pos;

  std::vector<double> tpr{0.0}, fpr{0.0};
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] >= *it) (fixated[i] ? tp : fp) += 1;
    }
    tpr.push_back(static_cast<double>(tp) / static_cast<double>(n_pos));
    fpr.push_back(static_cast<double>(fp) / static_cast<double>(n_neg));
  }
  tpr.push_back(1.0);
  fpr.push_back(1.0);
  double area = 0.0;
  for (std::size_t k = 1; k < tpr.size(); ++k) {
    area += (fpr[k] - fpr[k - 1]) * (tpr[k] + tpr[k - 1]) / 2.0;
  }
  return area;
}

/// Same curve but with an operating point at every distinct map value.
inline double auc_all_values(const Map2D& pred, const FixationSet& fx) {
  std::vector<bool> fixated(pred.size(), false);
  for (const auto& f : fx) fixated[f.row * pred.width() + f.col] = true;
  std::set<double> levels(pred.values().begin(), pred.values().end());
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) n_pos += fixated[i];
  const std::size_t n_neg = pred.size() - n_pos;
  std::vector<double> tpr{0.0}, fpr{0.0};
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] >= *it) (fixated[i] ? tp : fp) += 1;
    }
    tpr.push_back(static_cast<double>(tp) / static_cast<double>(n_pos));
    fpr.push_back(static_cast<double>(fp) / static_cast<double>(n_neg));
  }
  double area = 0.0;
  for (std::size_t k = 1; k < tpr.size(); ++k) {
    area += (fpr[k] - fpr[k - 1]) * (tpr[k] + tpr[k - 1]) / 2.0;
  }
  return area;
}

/// Pairwise win rate of positives over negatives, ties count half.
inline double pairwise_auc(const std::vector<double>& pos,
                           const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos) {
    for (double n : neg) wins += p > n ? 1.0 : p == n ? 0.5 : 0.0;
  }
  return wins / static_cast<double>(pos.size() * neg.size());
}

/// Direct 2-D convolution with a product Gaussian of radius ceil(3 sigma),
/// normalized over its support, edges replicated.
inline Map2D gaussian_blur(const Map2D& m, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  const int h = static_cast<int>(m.height());
  const int w = static_cast<int>(m.width());
  double norm = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      norm += std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  }
  Map2D out(m.height(), m.width());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = std::min(std::max(y + dy, 0), h - 1);
          const int xx = std::min(std::max(x + dx, 0), w - 1);
          acc += std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) *
                 m(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
        }
      }
      out(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = acc / norm;
    }
  }
  return out;
}

}  // namespace oracle
