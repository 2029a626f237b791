#include "intercity/likelihood.hpp"

#include <cstring>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#else
static int omp_get_max_threads() { return 1; }
#endif

namespace intercity {

double loglik_kernel_serial(const CompiledData& data, std::span<const double> theta, double* grad) {
  // Reduces through a per-observation row, like the deterministic parallel
  // path, so the two are bit-identical.
  const int K = data.num_params;
  if (grad) std::memset(grad, 0, sizeof(double) * K);
  std::vector<double> row(grad ? K : 0);
  double ll = 0.0;
  for (const auto& obs : data.observations) {
    if (grad) std::fill(row.begin(), row.end(), 0.0);
    ll += eval_compiled_obs(obs, theta, data.mu_index, grad ? row.data() : nullptr);
    if (grad)
      for (int j = 0; j < K; ++j) grad[j] += row[j];
  }
  return ll;
}

double loglik_kernel(const CompiledData& data, std::span<const double> theta, double* grad,
                     const EvalOptions& opts) {
  const int n = static_cast<int>(data.observations.size());
  const int K = data.num_params;
  if (!opts.parallel || n < 2) return loglik_kernel_serial(data, theta, grad);

  std::string error;
  double ll = 0.0;
  if (opts.deterministic) {
    // Per-observation rows, reduced in observation order: bit-identical at
    // any thread count.
    std::vector<double> ll_rows(n, 0.0);
    std::vector<double> grad_rows;
    if (grad) grad_rows.assign(static_cast<size_t>(n) * K, 0.0);
#pragma omp parallel for schedule(static) num_threads(opts.threads > 0 ? opts.threads : omp_get_max_threads())
    for (int i = 0; i < n; ++i) {
      try {
        double* g = grad ? grad_rows.data() + static_cast<size_t>(i) * K : nullptr;
        ll_rows[i] = eval_compiled_obs(data.observations[i], theta, data.mu_index, g);
      } catch (const std::exception& e) {
#pragma omp critical
        if (error.empty()) error = e.what();
      }
    }
    if (!error.empty()) throw Error(error);
    ll = std::accumulate(ll_rows.begin(), ll_rows.end(), 0.0);
    if (grad) {
      std::memset(grad, 0, sizeof(double) * K);
      for (int i = 0; i < n; ++i) {
        const double* g = grad_rows.data() + static_cast<size_t>(i) * K;
        for (int j = 0; j < K; ++j) grad[j] += g[j];
      }
    }
    return ll;
  }

  // Fast path: unordered reduction.
  if (grad) std::memset(grad, 0, sizeof(double) * K);
#pragma omp parallel num_threads(opts.threads > 0 ? opts.threads : omp_get_max_threads())
  {
    std::vector<double> local_grad(grad ? K : 0, 0.0);
    double local_ll = 0.0;
#pragma omp for schedule(static) nowait
    for (int i = 0; i < n; ++i) {
      try {
        local_ll += eval_compiled_obs(data.observations[i], theta, data.mu_index,
                                      grad ? local_grad.data() : nullptr);
      } catch (const std::exception& e) {
#pragma omp critical
        if (error.empty()) error = e.what();
      }
    }
#pragma omp critical
    {
      ll += local_ll;
      if (grad)
        for (int j = 0; j < K; ++j) grad[j] += local_grad[j];
    }
  }
  if (!error.empty()) throw Error(error);
  return ll;
}

namespace {

std::vector<double> pack_theta(const ModelSpec& spec, const std::map<std::string, double>& params) {
  return pack_parameters(spec, params).values;
}

}  // namespace

double loglik_rp(const RPDataset& rp, const std::map<std::string, double>& params,
                 const ModelSpec& spec) {
  if (rp.observations.empty()) return 0.0;
  CompiledData data = compile_observations(rp.observations, spec);
  return loglik_kernel_serial(data, pack_theta(spec, params), nullptr);
}

double loglik_sp(const SPDataset& sp, const std::map<std::string, double>& params,
                 const ModelSpec& spec) {
  if (sp.observations.empty()) return 0.0;
  CompiledData data = compile_observations(sp.observations, spec);
  return loglik_kernel_serial(data, pack_theta(spec, params), nullptr);
}

double loglik_joint(const RPDataset& rp, const SPDataset& sp,
                    const std::map<std::string, double>& params, const ModelSpec& spec) {
  return loglik_rp(rp, params, spec) + loglik_sp(sp, params, spec);
}

std::vector<double> gradient(const RPDataset& rp, const SPDataset& sp,
                             const std::map<std::string, double>& params, const ModelSpec& spec) {
  std::vector<double> theta = pack_theta(spec, params);
  std::vector<double> grad(theta.size(), 0.0), block(theta.size(), 0.0);
  if (!rp.observations.empty()) {
    CompiledData data = compile_observations(rp.observations, spec);
    loglik_kernel_serial(data, theta, block.data());
    for (size_t i = 0; i < grad.size(); ++i) grad[i] += block[i];
  }
  if (!sp.observations.empty()) {
    CompiledData data = compile_observations(sp.observations, spec);
    loglik_kernel_serial(data, theta, block.data());
    for (size_t i = 0; i < grad.size(); ++i) grad[i] += block[i];
  }
  for (double g : grad)
    if (!std::isfinite(g)) throw Error("gradient: non-finite component");
  return grad;
}

int JointObjective::num_params() const {
  if (rp && !rp->observations.empty()) return rp->num_params;
  if (sp) return sp->num_params;
  throw Error("JointObjective: no data");
}

double JointObjective::value(std::span<const double> theta) const {
  double ll = 0.0;
  if (rp && !rp->observations.empty()) ll += loglik_kernel(*rp, theta, nullptr, opts);
  if (sp && !sp->observations.empty()) ll += loglik_kernel(*sp, theta, nullptr, opts);
  return ll;
}

double JointObjective::value_and_gradient(std::span<const double> theta,
                                          std::vector<double>& grad) const {
  const int K = num_params();
  grad.assign(K, 0.0);
  std::vector<double> block(K, 0.0);
  double ll = 0.0;
  if (rp && !rp->observations.empty()) {
    ll += loglik_kernel(*rp, theta, block.data(), opts);
    for (int i = 0; i < K; ++i) grad[i] += block[i];
  }
  if (sp && !sp->observations.empty()) {
    ll += loglik_kernel(*sp, theta, block.data(), opts);
    for (int i = 0; i < K; ++i) grad[i] += block[i];
  }
  return ll;
}

FitStats fit_stats_from_ll(double ll0, double ll1, int K) {
  if (ll0 == 0.0) throw Error("fit_stats: ll0 is zero");
  FitStats s;
  s.ll0 = ll0;
  s.rho = 1.0 - ll1 / ll0;
  s.rho_adj = 1.0 - (ll1 - K) / ll0;
  return s;
}

FitStats fit_stats(double ll1, const CompiledData& rp, const CompiledData& sp, int K,
                   const EvalOptions& opts) {
  if (K < 0) throw Error("fit_stats: K must be non-negative");
  int n = std::max(rp.num_params, sp.num_params);
  std::vector<double> zeros(n, 0.0);
  double ll0 = 0.0;
  if (!rp.observations.empty()) ll0 += loglik_kernel(rp, zeros, nullptr, opts);
  if (!sp.observations.empty()) ll0 += loglik_kernel(sp, zeros, nullptr, opts);
  return fit_stats_from_ll(ll0, ll1, K);
}

double value_of_time(const std::map<std::string, double>& params, const std::string& time_coef,
                     const std::string& cost_coef) {
  auto t = params.find(time_coef);
  auto c = params.find(cost_coef);
  if (t == params.end()) throw Error("value_of_time: unknown coefficient '" + time_coef + "'");
  if (c == params.end()) throw Error("value_of_time: unknown coefficient '" + cost_coef + "'");
  if (c->second == 0.0) throw Error("value_of_time: zero cost coefficient");
  return t->second / c->second * 1e6;
}

}  // namespace intercity
