#include <doctest.h>

#include <cmath>

#include "intercity/common.hpp"

using namespace intercity;

TEST_CASE("logistic midpoint and saturation") {
  CHECK(numeric::logistic(0.0) == 0.5);
  CHECK(numeric::logistic(0.5696) == doctest::Approx(0.6386708721142788).epsilon(1e-12));
  double hi = numeric::logistic(50.0);
  CHECK(hi < 1.0);
  CHECK(hi > 1.0 - 1e-15);
  double lo = numeric::logistic(-745.0);
  CHECK(lo >= 0.0);
  CHECK(std::isfinite(lo));
}

TEST_CASE("log_sum_exp stability and exact values") {
  CHECK(numeric::log_sum_exp(std::vector<double>{2.0, 0.0}) ==
        doctest::Approx(2.1269280110429727).epsilon(1e-14));
  CHECK(numeric::log_sum_exp(std::vector<double>{5.0}) == doctest::Approx(5.0));
  // max-shift keeps huge magnitudes finite
  double big = numeric::log_sum_exp(std::vector<double>{1000.0, 999.0});
  CHECK(std::isfinite(big));
  CHECK(big == doctest::Approx(1000.0 + std::log(1 + std::exp(-1.0))).epsilon(1e-12));
  CHECK_THROWS_AS((void)numeric::log_sum_exp(std::vector<double>{}), Error);
  CHECK_THROWS_AS((void)numeric::log_sum_exp(std::vector<double>{std::nan("")}), Error);
}

TEST_CASE("softmax normalizes") {
  std::vector<double> v = {1.0, 0.0};
  numeric::softmax_inplace(v);
  CHECK(v[0] == doctest::Approx(0.7310585786300049).epsilon(1e-14));
  CHECK(v[0] + v[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("digamma against known points") {
  // psi(1) = -gamma, psi(0.5) = -gamma - 2 ln 2
  const double gamma = 0.5772156649015329;
  CHECK(numeric::digamma(1.0) == doctest::Approx(-gamma).epsilon(1e-10));
  CHECK(numeric::digamma(0.5) == doctest::Approx(-gamma - 2 * std::log(2.0)).epsilon(1e-10));
  CHECK(numeric::digamma(10.0) == doctest::Approx(2.251752589066721).epsilon(1e-10));
}

TEST_CASE("normal and t tail probabilities") {
  CHECK(numeric::p_value_z(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-8));
  CHECK(numeric::p_value_t(2.0, 60) == doctest::Approx(0.0499925).epsilon(1e-3));
  CHECK(numeric::p_value_z(0.0) == doctest::Approx(1.0));
}

TEST_CASE("significance codes follow the table footer convention") {
  CHECK(significance_code(0.0005) == "***");
  CHECK(significance_code(0.005) == "**");
  CHECK(significance_code(0.03) == "*");
  CHECK(significance_code(0.07) == ".");
  CHECK(significance_code(0.5) == "");
}

TEST_CASE("mix_seed decorrelates consecutive streams") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(7, 3) == mix_seed(7, 3));
}
