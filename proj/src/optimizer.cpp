#include "intercity/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace intercity {

namespace {

double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

OptimizerResult bfgs_maximize(const GradObjective& f, std::vector<double> x0,
                              const OptimizerControls& controls) {
  const int n = static_cast<int>(x0.size());
  OptimizerResult res;
  res.x = std::move(x0);

  std::vector<double> grad(n), grad_new(n);
  double fx = f(res.x, grad);
  if (!std::isfinite(fx)) throw Error("bfgs_maximize: non-finite objective at the starting point");

  // Inverse Hessian approximation, identity start.
  std::vector<double> H(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) H[static_cast<size_t>(i) * n + i] = 1.0;

  std::vector<double> dir(n), x_new(n), s(n), y(n), Hy(n);
  for (res.iterations = 0; res.iterations < controls.max_iterations; ++res.iterations) {
    res.gradient_norm = max_norm(grad);
    if (res.gradient_norm < controls.gradient_tolerance) {
      res.converged = true;
      break;
    }

    // Ascent direction d = H * grad.
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      for (int j = 0; j < n; ++j) v += H[static_cast<size_t>(i) * n + j] * grad[j];
      dir[i] = v;
    }
    double slope = 0.0;
    for (int i = 0; i < n; ++i) slope += dir[i] * grad[i];
    if (slope <= 0.0) {
      // Curvature lost; restart from steepest ascent.
      for (int i = 0; i < n; ++i) dir[i] = grad[i];
      slope = 0.0;
      for (int i = 0; i < n; ++i) slope += grad[i] * grad[i];
      std::fill(H.begin(), H.end(), 0.0);
      for (int i = 0; i < n; ++i) H[static_cast<size_t>(i) * n + i] = 1.0;
    }

    // Armijo backtracking.
    constexpr double kC1 = 1e-4;
    double step = 1.0;
    double fx_new = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < n; ++i) x_new[i] = res.x[i] + step * dir[i];
      try {
        fx_new = f(x_new, grad_new);
      } catch (const Error&) {
        fx_new = -std::numeric_limits<double>::infinity();
      }
      if (std::isfinite(fx_new) && fx_new >= fx + kC1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no improving step found

    double improvement = fx_new - fx;
    for (int i = 0; i < n; ++i) {
      s[i] = x_new[i] - res.x[i];
      y[i] = grad[i] - grad_new[i];  // for -f minimization convention: y = -(g_new - g)
    }
    res.x = x_new;
    fx = fx_new;
    grad.swap(grad_new);

    if (improvement < controls.relative_ll_tolerance * (std::fabs(fx) + 1.0)) {
      res.gradient_norm = max_norm(grad);
      res.converged = res.gradient_norm < controls.gradient_tolerance || improvement >= 0.0;
      ++res.iterations;
      break;
    }

    // BFGS update on the inverse Hessian of -f; with the sign conventions
    // above, sy > 0 is the usual curvature condition.
    double sy = 0.0;
    for (int i = 0; i < n; ++i) sy += s[i] * y[i];
    if (sy > 1e-12) {
      double yHy = 0.0;
      for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += H[static_cast<size_t>(i) * n + j] * y[j];
        Hy[i] = v;
        yHy += y[i] * v;
      }
      double c1 = (sy + yHy) / (sy * sy);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          H[static_cast<size_t>(i) * n + j] +=
              c1 * s[i] * s[j] - (Hy[i] * s[j] + s[i] * Hy[j]) / sy;
    }
  }
  res.value = fx;
  res.gradient_norm = max_norm(grad);
  if (!res.converged && res.gradient_norm < controls.gradient_tolerance) res.converged = true;
  return res;
}

}  // namespace intercity
