#include "intercity/nl_engine.hpp"

#include <numeric>

namespace intercity {

using numeric::log_sum_exp;
using numeric::logistic;

double lambda_link(std::span<const double> omega, std::span<const double> k) {
  if (omega.size() != k.size()) throw Error("lambda_link: omega and covariates not conformable");
  double w = 0.0;
  for (size_t i = 0; i < omega.size(); ++i) {
    if (!std::isfinite(k[i])) throw Error("lambda_link: non-finite covariate");
    w += omega[i] * k[i];
  }
  return logistic(w);
}

double logsum(std::span<const double> utilities, double lambda) {
  if (utilities.empty()) throw Error("logsum: empty utility vector");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw Error("logsum: lambda must lie in (0, 1]");
  std::vector<double> scaled(utilities.size());
  for (size_t i = 0; i < utilities.size(); ++i) scaled[i] = utilities[i] / lambda;
  return log_sum_exp(scaled);
}

double conditional_mode_prob(std::span<const double> utilities, double lambda, int mode_index) {
  if (mode_index < 0 || mode_index >= static_cast<int>(utilities.size()))
    throw Error("conditional_mode_prob: mode index out of range");
  double lse = logsum(utilities, lambda);
  return std::exp(utilities[mode_index] / lambda - lse);
}

double marginal_destination_prob(std::span<const double> dest_utilities,
                                 std::span<const double> nest_logsums,
                                 std::span<const double> lambdas, int dest_index) {
  size_t n = dest_utilities.size();
  if (nest_logsums.size() != n || lambdas.size() != n)
    throw Error("marginal_destination_prob: dimension mismatch");
  if (dest_index < 0 || dest_index >= static_cast<int>(n))
    throw Error("marginal_destination_prob: destination index out of range");
  std::vector<double> v(n);
  for (size_t d = 0; d < n; ++d) v[d] = dest_utilities[d] + lambdas[d] * nest_logsums[d];
  return std::exp(v[dest_index] - log_sum_exp(v));
}

namespace {

double mode_term_value(const UtilityTerm& t, const Observation& obs, const ModeAlt& alt) {
  using K = UtilityTerm::Kind;
  switch (t.kind) {
    case K::AltAttr: {
      auto it = alt.attrs.find(t.attribute);
      if (it == alt.attrs.end())
        throw Error("coefficient '" + t.coefficient + "': missing attribute '" + t.attribute +
                    "' for alternative " + to_string(alt.mode));
      return it->second;
    }
    case K::PersonAttr: {
      auto it = obs.context.find(t.attribute);
      if (it == obs.context.end())
        throw Error("coefficient '" + t.coefficient + "': missing person attribute '" + t.attribute + "'");
      return it->second;
    }
    case K::Constant:
      return 1.0;
    case K::StateDep:
      return obs.has_rp_mode && alt.mode == obs.rp_chosen_mode ? 1.0 : 0.0;
    default:
      throw Error("coefficient '" + t.coefficient + "': destination-level kind in mode term");
  }
}

double dest_term_value(const UtilityTerm& t, const Observation& obs, const DestAlt& dest) {
  using K = UtilityTerm::Kind;
  switch (t.kind) {
    case K::RegionAttr:
    case K::ObsDestAttr: {
      auto it = dest.attrs.find(t.attribute);
      if (it == dest.attrs.end())
        throw Error("coefficient '" + t.coefficient + "': missing destination attribute '" +
                    t.attribute + "' for region " + std::to_string(dest.region));
      return it->second;
    }
    case K::ContextAttr: {
      auto it = obs.context.find(t.attribute);
      if (it == obs.context.end())
        throw Error("coefficient '" + t.coefficient + "': missing context attribute '" + t.attribute + "'");
      return it->second;
    }
    default:
      throw Error("coefficient '" + t.coefficient + "': mode-level kind in destination term");
  }
}

}  // namespace

double systematic_utility(const UtilityContext& ctx, int dest_index, int mode_index) {
  const Observation& obs = *ctx.observation;
  const auto& params = *ctx.params;
  const ModelSpec& spec = *ctx.spec;
  const DestAlt& dest = obs.dests.at(dest_index);
  const ModeAlt& alt = dest.modes.at(mode_index);
  double bundle = 0.0;
  for (const auto& t : spec.mode_terms) {
    if (!t.in_scope(obs.scope) || !t.applies_to(alt.mode)) continue;
    auto it = params.find(t.coefficient);
    if (it == params.end()) throw Error("missing parameter '" + t.coefficient + "'");
    bundle += it->second * mode_term_value(t, obs, alt);
  }
  if (obs.scope == DataScope::SP && spec.has_scale) {
    auto it = params.find(ModelSpec::kScaleName);
    if (it == params.end()) throw Error("missing parameter 'log_mu'");
    bundle *= std::exp(it->second);
  }
  return bundle;
}

double destination_base_utility(const UtilityContext& ctx, int dest_index) {
  const Observation& obs = *ctx.observation;
  const auto& params = *ctx.params;
  const DestAlt& dest = obs.dests.at(dest_index);
  double v = 0.0;
  for (const auto& t : ctx.spec->destination_terms) {
    if (!t.in_scope(obs.scope) || !t.applies_to_region(dest.region)) continue;
    auto it = params.find(t.coefficient);
    if (it == params.end()) throw Error("missing parameter '" + t.coefficient + "'");
    v += it->second * dest_term_value(t, obs, dest);
  }
  return v;
}

CompiledData compile_observations(std::span<const Observation> observations, const ModelSpec& spec) {
  CompiledData data;
  data.names = spec.parameter_names();
  data.num_params = static_cast<int>(data.names.size());
  std::map<std::string, int> index;
  for (int i = 0; i < data.num_params; ++i) index[data.names[i]] = i;
  if (spec.has_scale) data.mu_index = index.at(ModelSpec::kScaleName);
  data.has_lambda = !spec.lambda_covariates.empty();

  data.observations.reserve(observations.size());
  for (const Observation& obs : observations) {
    CompiledObs c;
    c.flat = obs.scope == DataScope::SP && spec.sp_structure == SpStructure::ModeOnlyMNL;
    c.scaled = obs.scope == DataScope::SP && spec.has_scale;
    c.chosen_dest = obs.chosen_dest;
    c.chosen_mode = obs.chosen_mode;
    if (c.flat && obs.dests.size() != 1)
      throw Error("observation '" + obs.id + "': mode-only SP structure expects one destination block");
    for (const DestAlt& dest : obs.dests) {
      CompiledDest cd;
      cd.distance_km = dest.distance_km;
      cd.dest_x.assign(data.num_params, 0.0);
      for (const auto& t : spec.destination_terms) {
        if (!t.in_scope(obs.scope) || !t.applies_to_region(dest.region)) continue;
        cd.dest_x[index.at(t.coefficient)] += dest_term_value(t, obs, dest);
      }
      for (const ModeAlt& alt : dest.modes) {
        CompiledAlt ca;
        ca.x.assign(data.num_params, 0.0);
        for (const auto& t : spec.mode_terms) {
          if (!t.in_scope(obs.scope) || !t.applies_to(alt.mode)) continue;
          ca.x[index.at(t.coefficient)] += mode_term_value(t, obs, alt);
        }
        cd.modes.push_back(std::move(ca));
      }
      c.dests.push_back(std::move(cd));
    }
    if (data.has_lambda && !c.flat) {
      c.lambda_x.assign(data.num_params, 0.0);
      for (const auto& l : spec.lambda_covariates)
        c.lambda_x[index.at(l.coefficient)] += l.value(obs.context);
    }
    data.observations.push_back(std::move(c));
  }
  return data;
}

double eval_compiled_obs(const CompiledObs& obs, std::span<const double> theta, int mu_index,
                         double* grad) {
  const int K = static_cast<int>(theta.size());
  const double mu = (obs.scaled && mu_index >= 0) ? std::exp(theta[mu_index]) : 1.0;

  auto dot = [&theta, K](const std::vector<double>& x) {
    double s = 0.0;
    for (int i = 0; i < K; ++i) s += x[i] * theta[i];
    return s;
  };

  if (obs.flat) {
    const CompiledDest& d = obs.dests[0];
    const size_t M = d.modes.size();
    std::vector<double> v(M);
    for (size_t m = 0; m < M; ++m) v[m] = mu * dot(d.modes[m].x);
    double lse = log_sum_exp(v);
    double ll = v[obs.chosen_mode] - lse;
    if (grad) {
      for (size_t m = 0; m < M; ++m) {
        double g = (static_cast<int>(m) == obs.chosen_mode ? 1.0 : 0.0) - std::exp(v[m] - lse);
        const auto& x = d.modes[m].x;
        for (int i = 0; i < K; ++i) grad[i] += g * mu * x[i];
        if (obs.scaled && mu_index >= 0) grad[mu_index] += g * v[m];
      }
    }
    return ll;
  }

  // Nested: destination nests over mode alternatives.
  double lam = 1.0;
  if (!obs.lambda_x.empty()) lam = logistic(dot(obs.lambda_x));

  const size_t D = obs.dests.size();
  std::vector<std::vector<double>> V(D);       // scaled mode utilities
  std::vector<std::vector<double>> P_cond(D);  // conditional mode probabilities
  std::vector<double> gamma(D), vbar(D), Vd(D);
  for (size_t d = 0; d < D; ++d) {
    const auto& modes = obs.dests[d].modes;
    V[d].resize(modes.size());
    for (size_t m = 0; m < modes.size(); ++m) V[d][m] = mu * dot(modes[m].x);
    std::vector<double> scaled(modes.size());
    for (size_t m = 0; m < modes.size(); ++m) scaled[m] = V[d][m] / lam;
    double lse = log_sum_exp(scaled);
    gamma[d] = lse;
    P_cond[d].resize(modes.size());
    vbar[d] = 0.0;
    for (size_t m = 0; m < modes.size(); ++m) {
      P_cond[d][m] = std::exp(scaled[m] - lse);
      vbar[d] += P_cond[d][m] * V[d][m];
    }
    Vd[d] = dot(obs.dests[d].dest_x) + lam * gamma[d];
  }
  double lse_d = log_sum_exp(Vd);
  const int ds = obs.chosen_dest;
  const int ms = obs.chosen_mode;
  double ll = (Vd[ds] - lse_d) + (V[ds][ms] / lam - gamma[ds]);
  if (!std::isfinite(ll)) throw Error("non-finite log-probability for a chosen alternative");

  if (grad) {
    double g_lambda = -(V[ds][ms] - vbar[ds]) / (lam * lam);
    for (size_t d = 0; d < D; ++d) {
      double pd = std::exp(Vd[d] - lse_d);
      double ga = (static_cast<int>(d) == ds ? 1.0 : 0.0) - pd;
      const auto& dx = obs.dests[d].dest_x;
      for (int i = 0; i < K; ++i) grad[i] += ga * dx[i];
      g_lambda += ga * (gamma[d] - vbar[d] / lam);
      for (size_t m = 0; m < obs.dests[d].modes.size(); ++m) {
        double gm = ga * P_cond[d][m];
        if (static_cast<int>(d) == ds)
          gm += ((static_cast<int>(m) == ms ? 1.0 : 0.0) - P_cond[d][m]) / lam;
        const auto& x = obs.dests[d].modes[m].x;
        for (int i = 0; i < K; ++i) grad[i] += gm * mu * x[i];
        if (obs.scaled && mu_index >= 0) grad[mu_index] += gm * V[d][m];
      }
    }
    if (!obs.lambda_x.empty()) {
      double chain = g_lambda * lam * (1.0 - lam);
      for (int i = 0; i < K; ++i) grad[i] += chain * obs.lambda_x[i];
    }
  }
  return ll;
}

TreeEvaluation evaluate_choice_tree(const CompiledObs& obs, std::span<const double> theta,
                                    int mu_index) {
  const int K = static_cast<int>(theta.size());
  const double mu = (obs.scaled && mu_index >= 0) ? std::exp(theta[mu_index]) : 1.0;
  auto dot = [&theta, K](const std::vector<double>& x) {
    double s = 0.0;
    for (int i = 0; i < K; ++i) s += x[i] * theta[i];
    return s;
  };
  TreeEvaluation tree;
  if (obs.flat) {
    const auto& modes = obs.dests[0].modes;
    std::vector<double> v(modes.size());
    for (size_t m = 0; m < modes.size(); ++m) v[m] = mu * dot(modes[m].x);
    double lse = log_sum_exp(v);
    tree.dest_probs = {1.0};
    tree.logsums = {lse};
    tree.cond_probs.resize(1);
    tree.cond_probs[0].resize(modes.size());
    for (size_t m = 0; m < modes.size(); ++m) tree.cond_probs[0][m] = std::exp(v[m] - lse);
    return tree;
  }
  tree.lambda = obs.lambda_x.empty() ? 1.0 : logistic(dot(obs.lambda_x));
  const size_t D = obs.dests.size();
  std::vector<double> Vd(D);
  tree.cond_probs.resize(D);
  tree.logsums.resize(D);
  for (size_t d = 0; d < D; ++d) {
    const auto& modes = obs.dests[d].modes;
    std::vector<double> scaled(modes.size());
    for (size_t m = 0; m < modes.size(); ++m) scaled[m] = mu * dot(modes[m].x) / tree.lambda;
    double lse = log_sum_exp(scaled);
    tree.logsums[d] = lse;
    tree.cond_probs[d].resize(modes.size());
    for (size_t m = 0; m < modes.size(); ++m) tree.cond_probs[d][m] = std::exp(scaled[m] - lse);
    Vd[d] = dot(obs.dests[d].dest_x) + tree.lambda * lse;
  }
  double lse_d = log_sum_exp(Vd);
  tree.dest_probs.resize(D);
  for (size_t d = 0; d < D; ++d) tree.dest_probs[d] = std::exp(Vd[d] - lse_d);
  return tree;
}

double joint_prob(const Observation& obs, const std::map<std::string, double>& params,
                  const ModelSpec& spec) {
  CompiledData data = compile_observations({&obs, 1}, spec);
  ParameterVector theta = pack_parameters(spec, params);
  double ll = eval_compiled_obs(data.observations[0], theta.values, data.mu_index, nullptr);
  return std::exp(ll);
}

}  // namespace intercity
