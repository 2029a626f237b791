#ifndef INTERCITY_LIKELIHOOD_HPP
#define INTERCITY_LIKELIHOOD_HPP

#include "intercity/nl_engine.hpp"

namespace intercity {

struct EvalOptions {
  bool parallel = true;
  // Deterministic mode reduces per-observation terms in observation order,
  // giving bit-identical results at any thread count.
  bool deterministic = true;
  int threads = 0;  // 0 = OpenMP default
};

// OpenMP kernel. grad, when non-null, must have length data.num_params and
// is overwritten.
double loglik_kernel(const CompiledData& data, std::span<const double> theta, double* grad,
                     const EvalOptions& opts);

// Serial reference implementation, kept for testing the parallel kernel.
double loglik_kernel_serial(const CompiledData& data, std::span<const double> theta, double* grad);

// Spec-facing operations over raw datasets (compile-and-evaluate).
double loglik_rp(const RPDataset& rp, const std::map<std::string, double>& params,
                 const ModelSpec& spec);
double loglik_sp(const SPDataset& sp, const std::map<std::string, double>& params,
                 const ModelSpec& spec);
double loglik_joint(const RPDataset& rp, const SPDataset& sp,
                    const std::map<std::string, double>& params, const ModelSpec& spec);
std::vector<double> gradient(const RPDataset& rp, const SPDataset& sp,
                             const std::map<std::string, double>& params, const ModelSpec& spec);

// Joint objective over pre-compiled RP and SP blocks.
struct JointObjective {
  const CompiledData* rp = nullptr;
  const CompiledData* sp = nullptr;
  EvalOptions opts;

  int num_params() const;
  double value(std::span<const double> theta) const;
  double value_and_gradient(std::span<const double> theta, std::vector<double>& grad) const;
};

struct FitStats {
  double ll0 = 0.0;
  double rho = 0.0;
  double rho_adj = 0.0;
};

// rho = 1 - ll1/ll0, rho_adj = 1 - (ll1 - K)/ll0.
FitStats fit_stats_from_ll(double ll0, double ll1, int K);

// Null model: every free parameter at 0 (mu = 1 via the log transform,
// lambda = 0.5 via the logistic link).
FitStats fit_stats(double ll1, const CompiledData& rp, const CompiledData& sp, int K,
                   const EvalOptions& opts = {});

// (beta_time / beta_cost) * 1e6, VND per hour, for cost in Mil VND and time in hours.
double value_of_time(const std::map<std::string, double>& params, const std::string& time_coef,
                     const std::string& cost_coef);

}  // namespace intercity

#endif
