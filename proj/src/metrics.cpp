#include "deeprare/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace deeprare {

namespace {

void require_same_shape(const Map2D& a, const Map2D& b, const char* metric) {
  if (a.empty() || !a.same_shape(b)) {
    throw std::invalid_argument(std::string(metric) + ": dimension mismatch");
  }
}

void require_non_negative(const Map2D& m, const char* metric) {
  for (double v : m.values()) {
    if (v < 0.0) {
      throw std::invalid_argument(std::string(metric) +
                                  ": negative values in a density map");
    }
  }
}

// Distinct fixated pixels as a mask over the map's flat indices.
std::vector<bool> fixation_mask(const Map2D& pred, const FixationSet& fx,
                                const char* metric) {
  if (fx.empty()) {
    throw std::invalid_argument(std::string(metric) + ": no fixations");
  }
  std::vector<bool> mask(pred.size(), false);
  for (const Fixation& f : fx) {
    if (f.row >= pred.height() || f.col >= pred.width()) {
      throw std::invalid_argument(std::string(metric) +
                                  ": fixation outside the image");
    }
    mask[f.row * pred.width() + f.col] = true;
  }
  return mask;
}

// Exact ROC area: P(pos > neg) + P(pos == neg) / 2. `negatives` sorted.
double rank_auc(std::span<const double> positives,
                std::span<const double> negatives) {
  double wins = 0.0;
  for (double p : positives) {
    const auto below = std::lower_bound(negatives.begin(), negatives.end(), p);
    const auto upto = std::upper_bound(below, negatives.end(), p);
    wins += static_cast<double>(below - negatives.begin()) +
            0.5 * static_cast<double>(upto - below);
  }
  return wins / (static_cast<double>(positives.size()) *
                 static_cast<double>(negatives.size()));
}

struct MaskedStats {
  std::size_t count = 0;
  double sum = 0.0;
  double max = 0.0;
};

MaskedStats masked(const Map2D& s, const Map2D& mask) {
  MaskedStats out;
  const auto v = s.values();
  const auto m = mask.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (m[i] <= 0.5) continue;
    out.max = out.count == 0 ? v[i] : std::max(out.max, v[i]);
    out.sum += v[i];
    ++out.count;
  }
  return out;
}

}  // namespace

void validate(const SingletonGroundTruth& gt) {
  const Map2D& t = gt.target;
  if (t.empty() || !t.same_shape(gt.distractor) ||
      !t.same_shape(gt.background)) {
    throw std::invalid_argument("ground truth: mask dimension mismatch");
  }
  bool any_target = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double a = t[i], b = gt.distractor[i], c = gt.background[i];
    for (double v : {a, b, c}) {
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("ground truth: masks must be binary");
      }
    }
    if (a + b + c != 1.0) {
      throw std::invalid_argument(
          "ground truth: masks must be disjoint and cover the image");
    }
    any_target = any_target || a == 1.0;
  }
  if (!any_target) {
    throw std::invalid_argument("ground truth: empty target mask");
  }
}

double cc(const Map2D& pred, const Map2D& gt) {
  require_same_shape(pred, gt, "cc");
  const auto a = pred.values();
  const auto b = gt.values();
  const auto n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (!(var_a > 0.0) || !(var_b > 0.0)) {
    throw UndefinedMetric("cc: constant input map");
  }
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

double kl_div(const Map2D& pred, const Map2D& gt, double eps) {
  require_same_shape(pred, gt, "kl");
  require_non_negative(pred, "kl");
  require_non_negative(gt, "kl");
  if (!(eps > 0.0)) throw std::invalid_argument("kl: eps must be > 0");
  const auto p = pred.values();
  const auto g = gt.values();
  double sum_p = 0.0, sum_g = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum_p += p[i] + eps;
    sum_g += g[i] + eps;
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double gi = (g[i] + eps) / sum_g;
    const double pi = (p[i] + eps) / sum_p;
    kl += gi * std::log(gi / pi);
  }
  return std::max(kl, 0.0);
}

double nss(const Map2D& pred, const FixationSet& fx) {
  if (fx.empty()) throw std::invalid_argument("nss: no fixations");
  const auto v = pred.values();
  const auto n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  if (!(sd > 0.0)) throw UndefinedMetric("nss: constant prediction");
  double acc = 0.0;
  for (const Fixation& f : fx) {
    if (f.row >= pred.height() || f.col >= pred.width()) {
      throw std::invalid_argument("nss: fixation outside the image");
    }
    acc += (pred(f.row, f.col) - mean) / sd;
  }
  return acc / static_cast<double>(fx.size());
}

double auc_judd(const Map2D& pred, const FixationSet& fx) {
  const auto mask = fixation_mask(pred, fx, "auc_judd");
  const auto v = pred.values();
  std::vector<double> fixated;
  std::vector<double> all(v.begin(), v.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i]) fixated.push_back(v[i]);
  }
  const std::size_t n_fix = fixated.size();
  const std::size_t n_neg = v.size() - n_fix;
  if (n_neg == 0) throw UndefinedMetric("auc_judd: every pixel is fixated");

  std::sort(fixated.begin(), fixated.end(), std::greater<>());
  std::sort(all.begin(), all.end(), std::greater<>());
  std::vector<double> thresholds = fixated;
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<double> tp{0.0}, fp{0.0};
  for (double t : thresholds) {
    // Count of values >= t in a descending sequence.
    const auto above_fix = static_cast<std::size_t>(
        std::upper_bound(fixated.begin(), fixated.end(), t, std::greater<>()) -
        fixated.begin());
    const auto above_all = static_cast<std::size_t>(
        std::upper_bound(all.begin(), all.end(), t, std::greater<>()) -
        all.begin());
    tp.push_back(static_cast<double>(above_fix) / static_cast<double>(n_fix));
    fp.push_back(static_cast<double>(above_all - above_fix) /
                 static_cast<double>(n_neg));
  }
  tp.push_back(1.0);
  fp.push_back(1.0);

  double area = 0.0;
  for (std::size_t i = 0; i + 1 < tp.size(); ++i) {
    area += (fp[i + 1] - fp[i]) * (tp[i] + tp[i + 1]) / 2.0;
  }
  return area;
}

double auc_borji(const Map2D& pred, const FixationSet& fx,
                 std::size_t n_splits, std::uint64_t seed) {
  if (n_splits == 0) throw std::invalid_argument("auc_borji: n_splits == 0");
  const auto mask = fixation_mask(pred, fx, "auc_borji");
  const auto v = pred.values();
  std::vector<double> positives;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i]) {
      positives.push_back(v[i]);
    } else {
      pool.push_back(i);
    }
  }
  if (pool.empty()) throw UndefinedMetric("auc_borji: every pixel is fixated");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<double> negatives(positives.size());
  double total = 0.0;
  for (std::size_t s = 0; s < n_splits; ++s) {
    for (double& n : negatives) n = v[pool[pick(rng)]];
    std::sort(negatives.begin(), negatives.end());
    total += rank_auc(positives, negatives);
  }
  return total / static_cast<double>(n_splits);
}

double sim(const Map2D& pred, const Map2D& gt) {
  require_same_shape(pred, gt, "sim");
  require_non_negative(pred, "sim");
  require_non_negative(gt, "sim");
  const auto p = pred.values();
  const auto g = gt.values();
  double sum_p = 0.0, sum_g = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum_p += p[i];
    sum_g += g[i];
  }
  if (!(sum_p > 0.0) || !(sum_g > 0.0)) {
    throw UndefinedMetric("sim: all-zero input map");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += std::min(p[i] / sum_p, g[i] / sum_g);
  }
  return std::clamp(s, 0.0, 1.0);
}

double gsi(const Map2D& s, const SingletonGroundTruth& gt) {
  require_same_shape(s, gt.target, "gsi");
  require_same_shape(s, gt.distractor, "gsi");
  const MaskedStats t = masked(s, gt.target);
  const MaskedStats d = masked(s, gt.distractor);
  if (t.count == 0) throw UndefinedMetric("gsi: empty target mask");
  if (d.count == 0) throw UndefinedMetric("gsi: empty distractor mask");
  const double mt = t.sum / static_cast<double>(t.count);
  const double md = d.sum / static_cast<double>(d.count);
  if (mt + md == 0.0) return 0.0;
  return (mt - md) / (mt + md);
}

MaxSaliencyRatio msr(const Map2D& s, const SingletonGroundTruth& gt) {
  require_same_shape(s, gt.target, "msr");
  require_same_shape(s, gt.distractor, "msr");
  require_same_shape(s, gt.background, "msr");
  const MaskedStats t = masked(s, gt.target);
  const MaskedStats d = masked(s, gt.distractor);
  const MaskedStats b = masked(s, gt.background);
  MaxSaliencyRatio out;
  if (t.count > 0 && d.count > 0 && d.max > 0.0) out.target = t.max / d.max;
  if (t.count > 0 && b.count > 0 && t.max > 0.0) out.background = b.max / t.max;
  return out;
}

double default_ior_radius(std::size_t height, std::size_t width) noexcept {
  return 0.07 * std::hypot(static_cast<double>(height), static_cast<double>(width));
}

std::optional<int> fixation_search(const Map2D& s, const Map2D& target_mask,
                                   int max_fix, double ior_radius) {
  require_same_shape(s, target_mask, "fixation_search");
  if (max_fix < 1) throw std::invalid_argument("fixation_search: max_fix < 1");
  if (!(ior_radius > 0.0)) {
    throw std::invalid_argument("fixation_search: ior_radius must be > 0");
  }
  Map2D work = s;
  const auto v = work.values();
  const auto h = static_cast<std::ptrdiff_t>(work.height());
  const auto w = static_cast<std::ptrdiff_t>(work.width());
  const auto reach = static_cast<std::ptrdiff_t>(std::floor(ior_radius));
  const double r2 = ior_radius * ior_radius;

  for (int k = 1; k <= max_fix; ++k) {
    const auto it = std::max_element(v.begin(), v.end());
    if (!(*it > 0.0)) return std::nullopt;
    const auto idx = static_cast<std::size_t>(it - v.begin());
    if (target_mask[idx] > 0.5) return k;
    const auto r0 = static_cast<std::ptrdiff_t>(idx / work.width());
    const auto c0 = static_cast<std::ptrdiff_t>(idx % work.width());
    for (std::ptrdiff_t r = std::max<std::ptrdiff_t>(0, r0 - reach);
         r <= std::min(h - 1, r0 + reach); ++r) {
      for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, c0 - reach);
           c <= std::min(w - 1, c0 + reach); ++c) {
        const auto dr = static_cast<double>(r - r0);
        const auto dc = static_cast<double>(c - c0);
        if (dr * dr + dc * dc <= r2) {
          work(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = 0.0;
        }
      }
    }
  }
  return std::nullopt;
}

double percent_found(std::span<const EvalRecord> records, int budget) {
  if (records.empty()) throw std::invalid_argument("percent_found: no records");
  std::size_t found = 0;
  for (const EvalRecord& r : records) {
    if (r.fixations_to_target && *r.fixations_to_target <= budget) ++found;
  }
  return 100.0 * static_cast<double>(found) / static_cast<double>(records.size());
}

}  // namespace deeprare
