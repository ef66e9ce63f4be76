#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "pathweaver/rng.hpp"

using namespace pathweaver;

TEST_CASE("philox4x32-10 matches published known-answer vectors") {
  // Reference vectors from the Random123 test suite.
  const auto zeros = detail::philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zeros[0] == 0x6627e8d5u);
  CHECK(zeros[1] == 0xe169c58du);
  CHECK(zeros[2] == 0xbc57ac4cu);
  CHECK(zeros[3] == 0x9b00dbd8u);

  const auto ones = detail::philox4x32(
      {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
      {0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);

  const auto pi = detail::philox4x32(
      {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
      {0xa4093822u, 0x299f31d0u});
  CHECK(pi[0] == 0xd16cfe09u);
  CHECK(pi[1] == 0x94fdccebu);
  CHECK(pi[2] == 0x5001e420u);
  CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("normal_draw is a pure function of the key") {
  const RngKey key{0x1234abcd5678ef01ull, 3, 17, 2, RngRole::bridge_increment};
  const double a = normal_draw(key);
  const double b = normal_draw(key);
  CHECK(a == b);
  CHECK(std::isfinite(a));

  // Any coordinate change produces a different stream.
  RngKey other = key;
  other.sample += 1;
  CHECK(normal_draw(other) != a);
  other = key;
  other.node += 1;
  CHECK(normal_draw(other) != a);
  other = key;
  other.lane += 1;
  CHECK(normal_draw(other) != a);
  other = key;
  other.role = RngRole::integrator_noise;
  CHECK(normal_draw(other) != a);
}

TEST_CASE("normal_draw moments match N(0,1) over 1e6 draws") {
  const std::uint64_t seed = 2026;
  const std::size_t n = 1'000'000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = normal_draw(RngKey{seed, static_cast<std::uint32_t>(i % 1000),
                                        static_cast<std::uint32_t>(i / 1000), 0,
                                        RngRole::bridge_increment});
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  CHECK(std::abs(mean) < 0.004);           // 4 / sqrt(1e6)
  CHECK(std::abs(var - 1.0) < 0.006);      // ~4 sigma for the variance
}

TEST_CASE("streams differing only in sample index are uncorrelated") {
  const std::uint64_t seed = 7;
  const std::size_t n = 100'000;
  double sum_x = 0.0, sum_y = 0.0, sum_xy = 0.0, sum_xx = 0.0, sum_yy = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = normal_draw(
        RngKey{seed, 0, static_cast<std::uint32_t>(j), 0, RngRole::bridge_increment});
    const double y = normal_draw(
        RngKey{seed, 1, static_cast<std::uint32_t>(j), 0, RngRole::bridge_increment});
    sum_x += x;
    sum_y += y;
    sum_xy += x * y;
    sum_xx += x * x;
    sum_yy += y * y;
  }
  const double nd = static_cast<double>(n);
  const double cov = sum_xy / nd - (sum_x / nd) * (sum_y / nd);
  const double var_x = sum_xx / nd - (sum_x / nd) * (sum_x / nd);
  const double var_y = sum_yy / nd - (sum_y / nd) * (sum_y / nd);
  const double r = cov / std::sqrt(var_x * var_y);
  CHECK(std::abs(r) < 0.01);
}

TEST_CASE("uniform_draw stays in [0,1) and has mean 1/2") {
  const std::uint64_t seed = 99;
  const std::size_t n = 200'000;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = uniform_draw(
        RngKey{seed, 0, static_cast<std::uint32_t>(j), 0, RngRole::parameter_init});
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / static_cast<double>(n) - 0.5) < 0.003);
}

TEST_CASE("derive_seed separates and reproduces") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}
