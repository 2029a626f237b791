// Compares the serial reference kernel against the OpenMP kernel (fast and
// deterministic reductions) on a synthetic joint dataset.

#include <chrono>
#include <functional>
#include <iostream>

#include "intercity/likelihood.hpp"
#include "intercity/synth.hpp"

using namespace intercity;

namespace {

double time_ms(int reps, const std::function<double()>& f, double& value) {
  f();  // warm up
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) value = f();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 5000;
  int reps = argc > 2 ? std::atoi(argv[2]) : 20;

  ModelSpec spec = load_model_spec(std::string(FIXTURES_DIR) + "/nonbusiness.spec");
  Scenario scenario = load_scenario(std::string(FIXTURES_DIR) + "/base.scn");

  std::map<std::string, double> truth;
  for (const auto& name : spec.parameter_names()) truth[name] = 0.0;
  truth["g_cost"] = -1.2;
  truth["g_ivt"] = -0.08;
  truth["g_tourists"] = 0.05;
  truth["lam_const"] = 0.5;

  PersonTable persons = simulate_population(n, Marginals::survey_defaults(), 7);
  auto [rp, sp] = simulate_choices(persons, scenario, truth, spec, 1, 8);
  CompiledData crp = compile_observations(rp.observations, spec);
  CompiledData csp = compile_observations(sp.observations, spec);

  ParameterVector theta = pack_parameters(spec, truth);
  std::vector<double> grad(theta.values.size());

  double v_serial = 0.0, v_det = 0.0, v_fast = 0.0;
  double ms_serial = time_ms(reps, [&] {
    return loglik_kernel_serial(crp, theta.values, grad.data()) +
           loglik_kernel_serial(csp, theta.values, grad.data());
  }, v_serial);

  EvalOptions det{true, true, 0};
  double ms_det = time_ms(reps, [&] {
    return loglik_kernel(crp, theta.values, grad.data(), det) +
           loglik_kernel(csp, theta.values, grad.data(), det);
  }, v_det);

  EvalOptions fast{true, false, 0};
  double ms_fast = time_ms(reps, [&] {
    return loglik_kernel(crp, theta.values, grad.data(), fast) +
           loglik_kernel(csp, theta.values, grad.data(), fast);
  }, v_fast);

  std::cout << "observations: " << crp.observations.size() + csp.observations.size() << "\n";
  std::cout << "serial reference:       " << ms_serial << " ms  (ll " << v_serial << ")\n";
  std::cout << "parallel deterministic: " << ms_det << " ms  (ll " << v_det << ")\n";
  std::cout << "parallel fast:          " << ms_fast << " ms  (ll " << v_fast << ")\n";
  std::cout << "serial vs deterministic diff: " << v_serial - v_det << "\n";
  std::cout << "serial vs fast diff:          " << v_serial - v_fast << "\n";
  return 0;
}
