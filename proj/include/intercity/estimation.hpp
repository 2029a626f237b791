#ifndef INTERCITY_ESTIMATION_HPP
#define INTERCITY_ESTIMATION_HPP

#include <optional>

#include "intercity/likelihood.hpp"
#include "intercity/optimizer.hpp"

namespace intercity {

struct EstimationResult {
  ParameterVector estimates;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;
  double ll0 = 0.0;
  double ll1 = 0.0;
  double rho = 0.0;
  double rho_adj = 0.0;
  std::map<std::string, double> vot;  // label -> VND/h
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::string spec_digest;

  std::map<std::string, double> named_estimates() const;
};

struct EstimateControls {
  OptimizerControls optimizer;
  EvalOptions eval;
  bool compute_std_errors = true;
};

EstimationResult estimate(const RPDataset& rp, const SPDataset& sp, const ModelSpec& spec,
                          const std::optional<ParameterVector>& start = std::nullopt,
                          const EstimateControls& controls = {});

// Square roots of the diagonal of the inverse negative Hessian; the Hessian
// is central finite differences of the analytic gradient.
std::vector<double> standard_errors(const CompiledData& rp, const CompiledData& sp,
                                    std::span<const double> theta_hat,
                                    const std::vector<std::string>& names,
                                    const EvalOptions& opts = {});

std::string spec_digest(const ModelSpec& spec);

// Results document: attribute-value tree (JSON), stable key order.
void write_results(const EstimationResult& result, const std::string& path);
EstimationResult read_results(const std::string& path);

// Paper-style table to an output stream.
void print_results_table(const EstimationResult& result, std::ostream& out);

}  // namespace intercity

#endif
