#ifndef INTERCITY_OPTIMIZER_HPP
#define INTERCITY_OPTIMIZER_HPP

#include <functional>
#include <span>
#include <vector>

#include "intercity/common.hpp"

namespace intercity {

struct OptimizerControls {
  double gradient_tolerance = 1e-6;   // max-norm of the gradient
  double relative_ll_tolerance = 1e-10;
  int max_iterations = 500;
};

struct OptimizerResult {
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;  // max-norm at the final point
  int iterations = 0;
  bool converged = false;
};

// f(x, grad) returns the objective and fills grad. Maximization via BFGS
// with Armijo backtracking; monotone in the objective.
using GradObjective = std::function<double(std::span<const double>, std::vector<double>&)>;

OptimizerResult bfgs_maximize(const GradObjective& f, std::vector<double> x0,
                              const OptimizerControls& controls = {});

}  // namespace intercity

#endif
