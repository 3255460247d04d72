#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "atpm/walsh.hpp"

using namespace atpm;

TEST_CASE("padded length follows the next-power-of-two rule") {
  CHECK(walsh::padded_length(40320) == 65536);
  CHECK(walsh::padded_length(8) == 8);
  CHECK(walsh::padded_length(5) == 8);
  CHECK(walsh::padded_length(1) == 1);
  const std::vector<double> x{1, 2, 3};
  CHECK(walsh::pad(x) == std::vector<double>{1, 2, 3, 0});
}

TEST_CASE("small Walsh matrices") {
  CHECK(walsh::walsh_matrix(2) == std::vector<std::vector<int>>{{1, 1}, {1, -1}});
  const std::vector<std::vector<int>> four{
      {1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, -1, 1}, {1, -1, 1, -1}};
  CHECK(walsh::walsh_matrix(4) == four);
  CHECK(walsh::walsh_matrix(4) == oracle::walsh_by_sign_changes(4));
  CHECK_THROWS_AS(walsh::walsh_matrix(6), InvalidArgument);
}

TEST_CASE("row m changes sign exactly m times and rows are orthogonal") {
  for (std::size_t t2 = 2; t2 <= 256; t2 *= 2) {
    const auto w = walsh::walsh_matrix(t2);
    CHECK(w == oracle::walsh_by_sign_changes(t2));
    for (std::size_t m = 0; m < t2; ++m) {
      std::size_t changes = 0;
      for (std::size_t n = 1; n < t2; ++n) changes += w[m][n] != w[m][n - 1];
      CHECK(changes == m);
      for (std::size_t k = 0; k < t2; ++k) {
        long dot = 0;
        for (std::size_t n = 0; n < t2; ++n) dot += w[m][n] * w[k][n];
        CHECK(dot == (m == k ? static_cast<long>(t2) : 0));
      }
    }
  }
}

TEST_CASE("transform examples") {
  const std::vector<double> ones{1, 1, 1, 1};
  CHECK(walsh::fwft(ones).coefficients == std::vector<double>{4, 0, 0, 0});
  const std::vector<double> step{1, 1, -1, -1};
  CHECK(walsh::fwft(step).coefficients == std::vector<double>{0, 4, 0, 0});
  walsh::WalshSpectrum s{{4, 0, 0, 0}, 4, 4};
  CHECK(walsh::ifwft(s) == ones);
  const std::vector<double> odd{1, 2, 3};
  CHECK_THROWS_AS(walsh::fwft(odd), InvalidArgument);
}

TEST_CASE("fast transform matches the matrix oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (std::size_t t2 : {2u, 16u, 256u}) {
    std::vector<double> x(t2);
    for (auto& v : x) v = u(rng);
    const auto fast = walsh::fwft(x).coefficients;
    const auto direct = oracle::matrix_transform(oracle::walsh_by_sign_changes(t2), x);
    for (std::size_t i = 0; i < t2; ++i) CHECK(fast[i] == doctest::Approx(direct[i]).epsilon(1e-12));
  }
}

TEST_CASE("linearity, Parseval and round trip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::size_t t2 = 1024;
  std::vector<double> x(t2), y(t2), z(t2);
  for (std::size_t i = 0; i < t2; ++i) {
    x[i] = u(rng);
    y[i] = u(rng);
    z[i] = 2.0 * x[i] - 3.0 * y[i];
  }
  const auto fx = walsh::fwft(x).coefficients;
  const auto fy = walsh::fwft(y).coefficients;
  const auto fz = walsh::fwft(z).coefficients;
  double energy_x = 0, energy_f = 0, worst = 0;
  for (std::size_t i = 0; i < t2; ++i) {
    CHECK(fz[i] == doctest::Approx(2.0 * fx[i] - 3.0 * fy[i]).epsilon(1e-9));
    energy_x += x[i] * x[i];
    energy_f += fx[i] * fx[i];
  }
  CHECK(energy_f == doctest::Approx(static_cast<double>(t2) * energy_x));
  const auto back = walsh::ifwft(walsh::fwft(x));
  for (std::size_t i = 0; i < t2; ++i) worst = std::max(worst, std::abs(back[i] - x[i]));
  CHECK(worst < 1e-9);
}

TEST_CASE("code transforms") {
  const CodeSequence codes{1, 1, 2, 3, 0};
  const auto s = walsh::transform_codes(codes);
  CHECK(s.t2 == 8);
  CHECK(s.original_length == 5);
  CHECK(s.coefficients[0] == doctest::Approx(7.0));
  const auto channels = walsh::transform_one_hot(codes);
  REQUIRE(channels.size() == 4);
  // DC coefficient of an indicator spectrum counts occurrences
  CHECK(channels[0].coefficients[0] == doctest::Approx(1.0));
  CHECK(channels[1].coefficients[0] == doctest::Approx(2.0));
  CHECK(channels[2].coefficients[0] == doctest::Approx(1.0));
  CHECK(channels[3].coefficients[0] == doctest::Approx(1.0));
}
