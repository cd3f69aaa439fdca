// Saliency evaluation: distribution metrics (CC, KL, SIM), fixation metrics
// (NSS, AUC-Judd, AUC-Borji), singleton metrics (GSI, MSR) and the greedy
// fixation-search protocol.
//
// Metrics that are undefined for an input (constant maps, zero
// denominators) throw UndefinedMetric or return an empty optional; they
// never silently yield 0.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "deeprare/tensor.hpp"

namespace deeprare {

class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Fixation {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const Fixation&) const = default;
};

using FixationSet = std::vector<Fixation>;

/// Binary masks (values 0 / 1) over the image grid.
struct SingletonGroundTruth {
  Map2D target;
  Map2D distractor;
  Map2D background;
};

/// Throws std::invalid_argument unless the masks are binary, same-shaped,
/// disjoint, cover the image, and the target is nonempty.
void validate(const SingletonGroundTruth& gt);

struct EvalRecord {
  std::string image;
  std::map<std::string, double> values;
  // Fixation search outcome; empty when the target was never reached.
  std::optional<int> fixations_to_target;
  std::map<int, bool> found_within;
};

double cc(const Map2D& pred, const Map2D& gt);

inline constexpr double kKlEpsilon = 1e-8;
/// D(gt || pred) after regularizing both maps into distributions.
double kl_div(const Map2D& pred, const Map2D& gt, double eps = kKlEpsilon);

/// Mean z-score (population std) of pred over the fixations.
double nss(const Map2D& pred, const FixationSet& fx);

/// ROC area with thresholds at the distinct fixated values; negatives are
/// all non-fixated pixels. Duplicate fixations count once.
double auc_judd(const Map2D& pred, const FixationSet& fx);

/// Mean ROC area over `n_splits` draws of |fx| negatives sampled uniformly
/// (with replacement) from the non-fixated pixels.
double auc_borji(const Map2D& pred, const FixationSet& fx,
                 std::size_t n_splits = 100, std::uint64_t seed = 0);

double sim(const Map2D& pred, const Map2D& gt);

/// (mean_t - mean_d) / (mean_t + mean_d); 0 when both means are 0.
double gsi(const Map2D& s, const SingletonGroundTruth& gt);

struct MaxSaliencyRatio {
  std::optional<double> target;      // max(target) / max(distractors)
  std::optional<double> background;  // max(background) / max(target)
};

MaxSaliencyRatio msr(const Map2D& s, const SingletonGroundTruth& gt);

inline constexpr int kDefaultMaxFixations = 100;
/// 7% of the image diagonal.
double default_ior_radius(std::size_t height, std::size_t width) noexcept;

/// Greedy search: fixate the global maximum, stop if it lies in the target,
/// otherwise inhibit a disc of `ior_radius` and repeat. Returns the number of
/// fixations, or nothing if the target is not reached within `max_fix` or
/// the map runs out of positive saliency.
std::optional<int> fixation_search(const Map2D& s, const Map2D& target_mask,
                                   int max_fix, double ior_radius);

/// Percentage of records whose target was found within `budget` fixations.
double percent_found(std::span<const EvalRecord> records, int budget);

}  // namespace deeprare
