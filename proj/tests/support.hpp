// Helpers shared by the unit tests and the acceptance runner.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "deeprare/feature_io.hpp"
#include "deeprare/tensor.hpp"

namespace testing {

using deeprare::Backbone;
using deeprare::FeatureStack;
using deeprare::FeatureTensor;
using deeprare::Map2D;

inline Map2D random_map(std::mt19937_64& rng, std::size_t h, std::size_t w,
                        double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Map2D m(h, w);
  for (double& v : m.values()) v = u(rng);
  return m;
}

/// Values drawn from a handful of levels so that ties and empty bins occur.
inline Map2D random_level_map(std::mt19937_64& rng, std::size_t h,
                              std::size_t w, int levels) {
  std::uniform_int_distribution<int> pick(0, levels - 1);
  Map2D m(h, w);
  for (double& v : m.values()) v = static_cast<double>(pick(rng)) * 0.37;
  return m;
}

inline FeatureTensor random_tensor(std::mt19937_64& rng, int layer, int group,
                                   std::size_t h, std::size_t w,
                                   std::size_t c) {
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<double> data(h * w * c);
  for (double& v : data) v = static_cast<double>(static_cast<float>(u(rng)));
  return FeatureTensor(layer, group, h, w, c, std::move(data));
}

/// A stack matching the backbone's layer table. Group g's tensors have
/// side = base_side >> (g - 1) (at least 1) and `channels` channels.
inline FeatureStack random_stack(std::mt19937_64& rng, Backbone b,
                                 std::size_t base_side, std::size_t channels,
                                 std::uint32_t image_h, std::uint32_t image_w) {
  FeatureStack s;
  s.backbone = b;
  s.image_height = image_h;
  s.image_width = image_w;
  const auto table = deeprare::layer_selection(b);
  for (int g = 1; g <= 5; ++g) {
    const std::size_t side = std::max<std::size_t>(1, base_side >> (g - 1));
    for (int id : table.groups[static_cast<std::size_t>(g - 1)]) {
      s.tensors.push_back(random_tensor(rng, id, g, side, side, channels));
    }
  }
  return s;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("deeprare_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline double max_abs_diff(const Map2D& a, const Map2D& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
  }
  return d;
}

}  // namespace testing
