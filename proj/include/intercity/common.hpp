#ifndef INTERCITY_COMMON_HPP
#define INTERCITY_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace intercity {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace numeric {

// Overflow-safe logistic; exact 0/1 never returned for finite x.
inline double logistic(double x) {
  if (!std::isfinite(x)) throw Error("logistic: non-finite argument");
  double r;
  if (x >= 0.0) {
    r = 1.0 / (1.0 + std::exp(-x));
  } else {
    double e = std::exp(x);
    r = e / (1.0 + e);
  }
  if (r >= 1.0) return std::nextafter(1.0, 0.0);
  if (r <= 0.0) return std::numeric_limits<double>::min();
  return r;
}

// log(sum exp(v_i)) with max-shift.
inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw Error("log_sum_exp: empty vector");
  double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) throw Error("log_sum_exp: non-finite utility");
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// In-place softmax with max-shift; returns the log-normalizer.
inline double softmax_inplace(std::vector<double>& v) {
  double lse = log_sum_exp(v);
  for (double& x : v) x = std::exp(x - lse);
  return lse;
}

double digamma(double x);

// Regularized incomplete beta I_x(a, b).
double inc_beta(double a, double b, double x);

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Two-sided p-values.
inline double p_value_z(double z) { return 2.0 * (1.0 - normal_cdf(std::fabs(z))); }
double p_value_t(double t, double df);

}  // namespace numeric

// Paper-convention significance stars: *** < 0.001, ** < 0.01, * < 0.05, . < 0.1.
inline std::string significance_code(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return "";
}

// splitmix64, used to derive independent per-item seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace intercity

#endif
