#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "deeprare/postprocess.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace deeprare;

namespace {

double total(const Map2D& m) {
  return std::accumulate(m.values().begin(), m.values().end(), 0.0);
}

std::size_t argmax(const Map2D& m) {
  const auto v = m.values();
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST_CASE("kernel") {
  const auto k = gaussian_kernel(2.0);
  CHECK(k.size() == 13);
  CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(k[i] == k[12 - i]);
    CHECK(k[i] < k[i + 1]);
  }
  CHECK(gaussian_kernel(0.4).size() == 5);
  CHECK_THROWS_AS(gaussian_kernel(0.0), std::invalid_argument);
}

TEST_CASE("smoothing") {
  std::mt19937_64 rng(51);
  const Map2D m = testing::random_map(rng, 9, 14);
  CHECK(gaussian_smooth(m, 0.0) == m);
  const Map2D c = gaussian_smooth(Map2D(7, 5, 0.42), 3.3);
  CHECK(testing::max_abs_diff(c, Map2D(7, 5, 0.42)) <= 1e-15);
  CHECK_THROWS_AS(gaussian_smooth(m, -1.0), std::invalid_argument);

  SUBCASE("impulse against direct 2-D convolution") {
    Map2D impulse(21, 21);
    impulse(10, 10) = 1.0;
    const Map2D got = gaussian_smooth(impulse, 2.0);
    const Map2D want = oracle::gaussian_blur(impulse, 2.0);
    CHECK(testing::max_abs_diff(got, want) <= 1e-15);
    const auto k = gaussian_kernel(2.0);
    CHECK(got(10, 10) == doctest::Approx(k[6] * k[6]).epsilon(1e-14));
  }
  SUBCASE("random maps with edges against direct convolution") {
    for (double sigma : {0.7, 1.5, 4.0}) {
      const Map2D r = testing::random_map(rng, 11, 8);
      CHECK(testing::max_abs_diff(gaussian_smooth(r, sigma), oracle::gaussian_blur(r, sigma)) <= 1e-13);
    }
  }
  SUBCASE("mass is conserved for interior support") {
    Map2D m2(40, 40);
    for (std::size_t r = 15; r < 25; ++r) {
      for (std::size_t c = 12; c < 27; ++c) m2(r, c) = testing::random_map(rng, 1, 1, 0, 1)[0];
    }
    CHECK(std::abs(total(gaussian_smooth(m2, 2.5)) - total(m2)) <= 1e-9);
  }
}

TEST_CASE("finalize") {
  CHECK(finalize(Map2D(6, 6), {}, 6) == Map2D(6, 6));

  std::mt19937_64 rng(52);
  const Map2D m = testing::random_map(rng, 8, 8, 0, 1);
  CHECK(finalize(m, {0.0, false}, 8) == normalize_01(m));

  const Map2D blobs(1, 3, {1.0, 0.5, 0.0});
  const Map2D sq = finalize(blobs, {0.0, true}, 3);
  CHECK(sq(0, 0) / sq(0, 1) == 4.0);
  CHECK(blobs(0, 0) / blobs(0, 1) == 2.0);

  for (int trial = 0; trial < 20; ++trial) {
    const Map2D r = normalize_01(testing::random_map(rng, 10, 7));
    const Map2D out = finalize(r, {0.0, true}, 7);
    CHECK(argmax(out) == argmax(r));
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] * r[i] <= r[i]);
  }

  const Map2D blurred = finalize(m, {0.25, false}, 8);
  CHECK(testing::max_abs_diff(blurred, normalize_01(gaussian_smooth(m, 2.0))) <= 1e-15);
  CHECK_THROWS_AS(finalize(m, {-0.1, true}, 8), std::invalid_argument);
}
