#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "deeprare/rarity.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace deeprare;

TEST_CASE("constant map has zero rarity") {
  const RarityMap r = feature_map_rarity(Map2D(6, 4, 3.25));
  CHECK(r.map == Map2D(6, 4, 0.0));
  CHECK(r.threshold_applied == 0.0);
}

TEST_CASE("99 common pixels and one rare pixel") {
  Map2D f(10, 10, 0.0);
  f(7, 2) = 1.0;
  const RarityMap r = feature_map_rarity(f);
  CHECK(r.map(0, 0) == doctest::Approx(0.01005034).epsilon(1e-7));
  CHECK(r.map(7, 2) == doctest::Approx(4.6051702).epsilon(1e-7));
  CHECK(r.map(0, 0) == -std::log(0.99));
  CHECK(r.map(7, 2) == -std::log(0.01));
}

TEST_CASE("bin edges") {
  const BinEdges e(0.0, 11.0, 11);
  CHECK(e.edges().size() == 12);
  CHECK(e.bin_of(0.0) == 0);
  CHECK(e.bin_of(0.999) == 0);
  CHECK(e.bin_of(1.0) == 1);
  CHECK(e.bin_of(10.5) == 10);
  CHECK(e.bin_of(11.0) == 10);
  CHECK(BinEdges(2.0, 2.0, 5).bin_of(2.0) == 0);
  CHECK_THROWS_AS(BinEdges(0.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(BinEdges(1.0, 0.0, 4), std::invalid_argument);
}

TEST_CASE("histogram invariants") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Map2D f = testing::random_level_map(rng, 9, 13, 1 + trial % 7);
    const RarityHistogram h = rarity_histogram(f);
    REQUIRE(h.counts.size() == 11);
    REQUIRE(h.bin_edges.size() == 12);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == f.size());
    CHECK(std::accumulate(h.p.begin(), h.p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 11; ++i) {
      CHECK(std::isfinite(h.rarity[i]));
      if (h.counts[i] == 0) CHECK(h.rarity[i] == 0.0);
      for (std::size_t j = 0; j < 11; ++j) {
        if (h.counts[i] > 0 && h.counts[j] > 0 && h.p[i] < h.p[j]) {
          CHECK(h.rarity[i] > h.rarity[j]);
        }
      }
    }
  }
}

TEST_CASE("backprojection matches the brute-force oracle bit for bit") {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<std::size_t> side(1, 24);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t h = side(rng), w = side(rng);
    const Map2D f = trial % 2 ? testing::random_map(rng, h, w)
                              : testing::random_level_map(rng, h, w, 2 + trial % 9);
    const int bins = trial % 3 == 0 ? 11 : 2 + trial % 20;
    CHECK(feature_map_rarity(f, bins).map == oracle::rarity(f, bins));
  }
}

TEST_CASE("rarity is unchanged by positive affine maps") {
  // Level maps keep every value well away from the interior bin edges, so
  // rounding in the shifted edges cannot move a pixel across one.
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Map2D f = testing::random_level_map(rng, 12, 10, 6);
    Map2D g = f;
    for (double& v : g.values()) v = v * 3.7 - 1.2;
    CHECK(feature_map_rarity(g).map == feature_map_rarity(f).map);
  }
}

TEST_CASE("normalized rarity does not depend on the log base") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    const Map2D f = testing::random_map(rng, 15, 15);
    const Map2D a = normalize_01(feature_map_rarity(f, 11, LogBase::natural).map);
    const Map2D b = normalize_01(feature_map_rarity(f, 11, LogBase::two).map);
    CHECK(testing::max_abs_diff(a, b) <= 1e-12);
    const Map2D raw2 = feature_map_rarity(f, 11, LogBase::two).map;
    const Map2D rawe = feature_map_rarity(f, 11, LogBase::natural).map;
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(raw2[i] == doctest::Approx(rawe[i] / std::log(2.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("threshold") {
  SUBCASE("zero is the identity") {
    std::mt19937_64 rng(25);
    const RarityMap r = feature_map_rarity(testing::random_map(rng, 7, 7));
    const RarityMap t = apply_rarity_threshold(r, 0.0);
    CHECK(t.map == r.map);
    CHECK(t.threshold_applied == 0.0);
  }
  SUBCASE("two levels keep only the high one") {
    const RarityMap r{Map2D(1, 4, {0.2, 3.0, 0.2, 3.0}), 0.0};
    const RarityMap t = apply_rarity_threshold(r, 0.9);
    CHECK(t.map == Map2D(1, 4, {0.0, 3.0, 0.0, 3.0}));
    CHECK(t.threshold_applied == 0.9);
  }
  SUBCASE("a 0..1 ramp keeps its top decile") {
    Map2D ramp(10, 10);
    for (std::size_t i = 0; i < 100; ++i) ramp[i] = static_cast<double>(i) / 99.0;
    const RarityMap t = apply_rarity_threshold({ramp, 0.0}, 0.9);
    for (std::size_t i = 0; i < 100; ++i) {
      CHECK(t.map[i] == (i >= 90 ? ramp[i] : 0.0));
    }
  }
  SUBCASE("survivors shrink as T grows") {
    std::mt19937_64 rng(26);
    for (int trial = 0; trial < 20; ++trial) {
      const RarityMap r = feature_map_rarity(testing::random_level_map(rng, 11, 9, 8));
      const Map2D norm = normalize_01(r.map);
      Map2D prev = r.map;
      for (double T : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
        const RarityMap t = apply_rarity_threshold(r, T);
        for (std::size_t i = 0; i < r.map.size(); ++i) {
          if (t.map[i] != 0.0) {
            CHECK(prev[i] != 0.0);
            CHECK(norm[i] >= T);
            CHECK(t.map[i] == r.map[i]);
          }
        }
        prev = t.map;
      }
    }
  }
  CHECK_THROWS_AS(apply_rarity_threshold({Map2D(1, 1), 0.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(apply_rarity_threshold({Map2D(1, 1), 0.0}, -0.1), std::invalid_argument);
}
