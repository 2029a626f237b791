#ifndef INTERCITY_TRIP_GEN_HPP
#define INTERCITY_TRIP_GEN_HPP

#include <optional>

#include "intercity/dataset.hpp"

namespace intercity {

struct RegressionFit {
  enum class Family { Linear, NegativeBinomial };
  Family family = Family::Linear;
  std::vector<std::string> names;  // "(Intercept)" first when present
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_or_z;
  std::vector<double> p_values;
  // Count model
  double theta = 0.0;
  double theta_se = 0.0;
  double two_loglik = 0.0;
  double null_deviance = 0.0;
  double resid_deviance = 0.0;
  // Linear model
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double residual_se = 0.0;
  std::vector<double> residuals;
  int n = 0;
  bool converged = true;
};

enum class InterceptMode { Free, FixedZero };

RegressionFit fit_linear(const std::vector<TripGenRecord>& records,
                         const std::vector<std::string>& covariate_names,
                         InterceptMode intercept_mode = InterceptMode::Free);

// NB-2 with log link: E[Y] = exp(x'delta), Var = m + m^2/theta.
RegressionFit fit_negbin(const std::vector<TripGenRecord>& records,
                         const std::vector<std::string>& covariate_names,
                         std::optional<double> fixed_theta = std::nullopt);

// Linear: x'delta floored at 0 (flag set when floored). Count: exp(x'delta).
double predict_trips(const RegressionFit& fit, const std::map<std::string, double>& covariates,
                     bool* floored = nullptr);

void write_regression_fit(const RegressionFit& fit, Purpose purpose, const std::string& path);
std::pair<RegressionFit, Purpose> read_regression_fit(const std::string& path);

}  // namespace intercity

#endif
