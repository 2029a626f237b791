#ifndef INTERCITY_NL_ENGINE_HPP
#define INTERCITY_NL_ENGINE_HPP

#include <span>

#include "intercity/dataset.hpp"
#include "intercity/model_spec.hpp"

namespace intercity {

// Individual-specific logsum parameter: logistic(omega' k), strictly in (0,1).
double lambda_link(std::span<const double> omega, std::span<const double> k);

// Inclusive value ln sum_m exp(V_m / lambda), max-shifted.
double logsum(std::span<const double> utilities, double lambda);

double conditional_mode_prob(std::span<const double> utilities, double lambda, int mode_index);

// Softmax over V_d = dest_utilities[d] + lambdas[d] * nest_logsums[d].
double marginal_destination_prob(std::span<const double> dest_utilities,
                                 std::span<const double> nest_logsums,
                                 std::span<const double> lambdas, int dest_index);

struct UtilityContext {
  const Observation* observation = nullptr;
  const std::map<std::string, double>* params = nullptr;
  const ModelSpec* spec = nullptr;
};

// Mode-level systematic utility; for SP scope the pre-scale bundle is
// multiplied by mu = exp(log_mu).
double systematic_utility(const UtilityContext& ctx, int dest_index, int mode_index);

// Destination-level linear part (excludes the lambda * logsum piece).
double destination_base_utility(const UtilityContext& ctx, int dest_index);

// Probability of the observation's chosen (destination, mode) leaf.
double joint_prob(const Observation& obs, const std::map<std::string, double>& params,
                  const ModelSpec& spec);

// --- compiled evaluation -------------------------------------------------
//
// Observations are lowered to dense per-alternative design rows so the
// likelihood and gradient kernels are plain dot products.

struct CompiledAlt {
  std::vector<double> x;  // d(pre-scale bundle)/d(theta), length K
};

struct CompiledDest {
  double distance_km = 0.0;
  std::vector<double> dest_x;  // d(A_d)/d(theta)
  std::vector<CompiledAlt> modes;
};

struct CompiledObs {
  std::vector<CompiledDest> dests;
  std::vector<double> lambda_x;  // covariate values at the omega slots
  int chosen_dest = 0;
  int chosen_mode = 0;
  bool flat = false;    // business SP: plain MNL over modes, no nest
  bool scaled = false;  // SP: bundle multiplied by mu
};

struct CompiledData {
  std::vector<CompiledObs> observations;
  std::vector<std::string> names;
  int num_params = 0;
  int mu_index = -1;
  bool has_lambda = false;
};

CompiledData compile_observations(std::span<const Observation> observations, const ModelSpec& spec);

// Log-probability of the chosen leaf; accumulates the analytic gradient
// into grad (length num_params) when grad != nullptr.
double eval_compiled_obs(const CompiledObs& obs, std::span<const double> theta, int mu_index,
                         double* grad);

struct TreeEvaluation {
  double lambda = 1.0;
  std::vector<double> dest_probs;
  std::vector<std::vector<double>> cond_probs;
  std::vector<double> logsums;  // Gamma_d
};

TreeEvaluation evaluate_choice_tree(const CompiledObs& obs, std::span<const double> theta,
                                    int mu_index);

}  // namespace intercity

#endif
