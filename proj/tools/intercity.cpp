// Command-line front end: estimate / tripgen / accessibility / forecast /
// simulate / validate. Exit codes: 0 ok, 1 input or usage error,
// 2 non-convergence, 3 validation failure.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "intercity/estimation.hpp"
#include "intercity/ini.hpp"
#include "intercity/forecast.hpp"
#include "intercity/synth.hpp"
#include "intercity/trip_gen.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace intercity;

namespace {

void require_file(const std::string& path, const std::string& flag) {
  if (!fs::exists(path)) throw Error("--" + flag + ": no such file '" + path + "'");
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

std::map<std::string, double> load_params_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  ordered_json j = ordered_json::parse(in);
  std::map<std::string, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value().get<double>();
  return out;
}

int cmd_estimate(const std::string& spec_path, const std::string& rp_path,
                 const std::string& sp_path, const std::string& persons_path,
                 const std::string& regions_path, const std::string& out_path,
                 const std::string& start_path, double tol, int max_iter, bool deterministic,
                 int threads) {
  apply_threads(threads);
  ModelSpec spec = load_model_spec(spec_path);
  auto diags = validate_spec(spec);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "spec: " << d << "\n";
    return 1;
  }
  PersonTable persons = load_persons(persons_path);
  RegionTable regions = load_regions(regions_path);
  RPDataset rp = load_rp_dataset(rp_path, persons, regions, spec);
  SPDataset sp = load_sp_dataset(sp_path, persons, regions, spec);

  EstimateControls controls;
  controls.optimizer.gradient_tolerance = tol;
  controls.optimizer.max_iterations = max_iter;
  controls.eval.deterministic = deterministic;
  controls.eval.threads = threads;

  std::optional<ParameterVector> start;
  if (!start_path.empty()) start = pack_parameters(spec, load_params_json(start_path));

  EstimationResult result = estimate(rp, sp, spec, start, controls);
  write_results(result, out_path);
  print_results_table(result, std::cout);
  if (!result.converged) {
    std::cerr << "estimate: did not converge in " << result.iterations
              << " iterations (|grad| = " << result.gradient_norm << "); partial results written\n";
    return 2;
  }
  return 0;
}

int cmd_tripgen(const std::string& data_path, const std::string& persons_path,
                const std::string& family, const std::string& covariates_arg,
                const std::string& intercept, double fixed_theta, const std::string& out_path) {
  PersonTable persons = load_persons(persons_path);
  auto records = load_tripgen_records(data_path, persons);
  if (records.empty()) throw Error("--data: no records");
  std::vector<std::string> covariates = split(covariates_arg, ',');
  Purpose purpose = records.front().purpose;

  RegressionFit fit;
  if (family == "linear") {
    fit = fit_linear(records, covariates,
                     intercept == "zero" ? InterceptMode::FixedZero : InterceptMode::Free);
  } else if (family == "negbin") {
    fit = fit_negbin(records, covariates,
                     fixed_theta > 0 ? std::optional<double>(fixed_theta) : std::nullopt);
  } else {
    throw Error("--family must be 'linear' or 'negbin'");
  }
  write_regression_fit(fit, purpose, out_path);
  std::cout << "family: " << family << "  n: " << fit.n << "\n";
  for (size_t i = 0; i < fit.names.size(); ++i)
    std::cout << "  " << fit.names[i] << " = " << fit.coefficients[i] << " (se "
              << fit.std_errors[i] << ")\n";
  if (fit.family == RegressionFit::Family::NegativeBinomial)
    std::cout << "  theta = " << fit.theta << " (se " << fit.theta_se << ")\n";
  else
    std::cout << "  R2 = " << fit.r2 << "  adj R2 = " << fit.adj_r2 << "\n";
  return fit.converged ? 0 : 2;
}

int cmd_accessibility(const std::string& spec_path, const std::string& model_path,
                      const std::string& scenario_path, const std::string& persons_path,
                      double mu3, const std::string& out_path) {
  ModelSpec spec = load_model_spec(spec_path);
  EstimationResult model = read_results(model_path);
  Scenario scenario = load_scenario(scenario_path);
  PersonTable persons = load_persons(persons_path);
  auto params = model.named_estimates();

  CsvTable t;
  t.header = {"person_id", "accessibility"};
  for (const auto& p : persons) {
    double a = accessibility(p, scenario, params, spec, mu3);
    std::ostringstream ss;
    ss << std::setprecision(15) << a;
    t.rows.push_back({p.id, ss.str()});
  }
  write_csv(out_path, t);
  std::cout << "accessibility written for " << persons.size() << " persons\n";
  return 0;
}

int cmd_forecast(const std::string& spec_path, const std::string& model_path,
                 const std::string& tripgen_path, const std::string& scenario_path,
                 const std::string& base_path, const std::string& population_path,
                 double mu3, const std::string& out_dir) {
  ModelSpec spec = load_model_spec(spec_path);
  EstimationResult model = read_results(model_path);
  if (model.spec_digest != spec_digest(spec))
    throw Error("--model: results document does not match --spec (digest mismatch)");
  auto [tg_fit, tg_purpose] = read_regression_fit(tripgen_path);
  if (tg_purpose != spec.purpose) throw Error("--tripgen: purpose does not match --spec");
  Scenario base = load_scenario(base_path);
  Scenario alt = load_scenario(scenario_path);
  PersonTable population = load_persons(population_path);
  auto params = model.named_estimates();

  fs::create_directories(out_dir);
  DemandTable base_demand = forecast_demand(population, base, params, tg_fit, spec, mu3);
  DemandTable alt_demand = forecast_demand(population, alt, params, tg_fit, spec, mu3);
  write_demand_table(base_demand, out_dir + "/demand_base.csv");
  write_demand_table(alt_demand, out_dir + "/demand_scenario.csv");
  InducedTravelReport report = induced_travel(base_demand, alt_demand);
  write_induced_report(report, out_dir + "/induced_travel.json");

  std::cout << "base trips " << base_demand.total_trips() << ", scenario trips "
            << alt_demand.total_trips() << " (" << report.pct_trips << "% induced)\n";
  return 0;
}

int cmd_simulate(const std::string& spec_path, const std::string& scenario_path,
                 const std::string& params_path, int n, int trips, int sp_situations,
                 std::uint64_t seed, const std::string& out_dir) {
  ModelSpec spec = load_model_spec(spec_path);
  Scenario scenario = load_scenario(scenario_path);
  auto truth = load_params_json(params_path);

  PersonTable persons = simulate_population(n, Marginals::survey_defaults(), seed);
  SimulateOptions options;
  options.sp_situations_per_person = sp_situations;
  auto [rp, sp] = simulate_choices(persons, scenario, truth, spec, trips, seed + 1, options);

  fs::create_directories(out_dir);
  write_persons_csv(persons, out_dir + "/persons.csv");
  write_regions_csv(scenario.regions, out_dir + "/regions.csv");
  write_rp_csv(rp, out_dir + "/rp.csv");
  write_sp_csv(sp, out_dir + "/sp.csv");
  std::cout << "wrote " << persons.size() << " persons, " << rp.observations.size()
            << " RP and " << sp.observations.size() << " SP observations\n";
  return 0;
}

int cmd_validate(const std::string& spec_path, const std::string& rp_path,
                 const std::string& sp_path, const std::string& persons_path,
                 const std::string& regions_path, int points, std::uint64_t seed) {
  if (points <= 0) throw Error("--points must be positive");
  ModelSpec spec = load_model_spec(spec_path);
  PersonTable persons = load_persons(persons_path);
  RegionTable regions = load_regions(regions_path);
  RPDataset rp = load_rp_dataset(rp_path, persons, regions, spec);
  SPDataset sp = load_sp_dataset(sp_path, persons, regions, spec);

  CompiledData crp = compile_observations(rp.observations, spec);
  CompiledData csp = compile_observations(sp.observations, spec);
  JointObjective obj{&crp, &csp, {}};
  int K = obj.num_params();
  auto names = spec.parameter_names();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst_grad = 0.0, worst_prob = 0.0;
  std::vector<double> worst_point;

  for (int p = 0; p < points; ++p) {
    std::vector<double> theta(K);
    for (int i = 0; i < K; ++i) {
      theta[i] = u(rng);
      // keep lambda interior: link coefficients on large covariates saturate
      // the logistic, flattening the likelihood and degrading the FD check
      if (names[i].rfind("lam_", 0) == 0 && names[i] != "lam_const") theta[i] *= 0.04;
    }
    std::vector<double> grad(K);
    obj.value_and_gradient(theta, grad);
    for (int i = 0; i < K; ++i) {
      double h = 1e-6 * (1.0 + std::fabs(theta[i]));
      std::vector<double> tp = theta, tm = theta;
      tp[i] += h;
      tm[i] -= h;
      double fd = (obj.value(tp) - obj.value(tm)) / (2 * h);
      double rel = std::fabs(grad[i] - fd) / std::max(1.0, std::fabs(fd));
      if (rel > worst_grad) {
        worst_grad = rel;
        worst_point = theta;
      }
    }
    // Engine-vs-bruteforce on a handful of observations at this point.
    std::map<std::string, double> named;
    for (int i = 0; i < K; ++i) named[names[i]] = theta[i];
    for (size_t o = 0; o < std::min<size_t>(5, rp.observations.size()); ++o) {
      const Observation& obs = rp.observations[o];
      double engine = joint_prob(obs, named, spec);
      for (const auto& leaf : bruteforce_prob(obs, named, spec))
        if (leaf.dest_index == obs.chosen_dest && leaf.mode_index == obs.chosen_mode)
          worst_prob = std::max(worst_prob, std::fabs(engine - leaf.prob));
    }
  }

  std::cout << "worst gradient relative error: " << worst_grad << "\n";
  std::cout << "worst engine-vs-bruteforce probability error: " << worst_prob << "\n";
  // Central differences at h = 1e-6 carry ~1e-6 relative noise; real gradient
  // bugs show up orders of magnitude above this threshold.
  if (worst_grad > 1e-5 || worst_prob > 1e-10) {
    ordered_json j;
    for (int i = 0; i < K; ++i) j[names[i]] = worst_point.empty() ? 0.0 : worst_point[i];
    std::cerr << "validation failed at point: " << j.dump() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intercity travel demand toolkit"};
  app.require_subcommand(1);

  std::string spec_path, rp_path, sp_path, persons_path, regions_path, out_path, start_path;
  std::string model_path, tripgen_path, scenario_path, base_path, population_path, out_dir;
  std::string data_path, family = "negbin", covariates, intercept = "free", params_path;
  double tol = 1e-6, mu3 = 1.0, fixed_theta = 0.0;
  int max_iter = 500, threads = 0, points = 20, n = 1000, trips = 1, sp_situations = 4;
  std::uint64_t seed = 20110901;
  bool deterministic = true;

  auto* est = app.add_subcommand("estimate", "Joint RP/SP maximum-likelihood estimation");
  est->add_option("--spec", spec_path)->required();
  est->add_option("--rp", rp_path)->required();
  est->add_option("--sp", sp_path)->required();
  est->add_option("--persons", persons_path)->required();
  est->add_option("--regions", regions_path)->required();
  est->add_option("--out", out_path)->required();
  est->add_option("--start", start_path);
  est->add_option("--tol", tol);
  est->add_option("--max-iter", max_iter);
  est->add_option("--threads", threads);
  est->add_flag("--deterministic,!--fast", deterministic,
                "Bit-identical reductions at any thread count (default on)");

  auto* tg = app.add_subcommand("tripgen", "Trip-generation regression");
  tg->add_option("--data", data_path)->required();
  tg->add_option("--persons", persons_path)->required();
  tg->add_option("--family", family, "linear | negbin");
  tg->add_option("--covariates", covariates, "Comma list drawn from the person schema")->required();
  tg->add_option("--intercept", intercept, "free | zero");
  tg->add_option("--theta", fixed_theta, "Fix the NB dispersion instead of estimating it");
  tg->add_option("--out", out_path)->required();

  auto* acc = app.add_subcommand("accessibility", "Per-person logsum accessibility");
  acc->add_option("--spec", spec_path)->required();
  acc->add_option("--model", model_path)->required();
  acc->add_option("--scenario", scenario_path)->required();
  acc->add_option("--persons", persons_path)->required();
  acc->add_option("--mu3", mu3);
  acc->add_option("--out", out_path)->required();

  auto* fc = app.add_subcommand("forecast", "Scenario demand forecast and induced travel");
  fc->add_option("--spec", spec_path)->required();
  fc->add_option("--model", model_path)->required();
  fc->add_option("--tripgen", tripgen_path)->required();
  fc->add_option("--scenario", scenario_path)->required();
  fc->add_option("--base-scenario", base_path)->required();
  fc->add_option("--population", population_path)->required();
  fc->add_option("--mu3", mu3);
  fc->add_option("--out", out_dir)->required();

  auto* sim = app.add_subcommand("simulate", "Synthetic population and choices");
  sim->add_option("--spec", spec_path)->required();
  sim->add_option("--scenario", scenario_path)->required();
  sim->add_option("--params", params_path)->required();
  sim->add_option("--n", n);
  sim->add_option("--trips", trips);
  sim->add_option("--sp-situations", sp_situations);
  sim->add_option("--seed", seed);
  sim->add_option("--out", out_dir)->required();

  auto* val = app.add_subcommand("validate", "Gradient and oracle cross-checks");
  val->add_option("--spec", spec_path)->required();
  val->add_option("--rp", rp_path)->required();
  val->add_option("--sp", sp_path)->required();
  val->add_option("--persons", persons_path)->required();
  val->add_option("--regions", regions_path)->required();
  val->add_option("--points", points);
  val->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& [path, flag] :
         std::initializer_list<std::pair<std::string, std::string>>{
             {spec_path, "spec"}, {rp_path, "rp"}, {sp_path, "sp"}, {persons_path, "persons"},
             {regions_path, "regions"}, {model_path, "model"}, {tripgen_path, "tripgen"},
             {scenario_path, "scenario"}, {base_path, "base-scenario"},
             {population_path, "population"}, {data_path, "data"}, {params_path, "params"},
             {start_path, "start"}})
      if (!path.empty()) require_file(path, flag);

    if (est->parsed())
      return cmd_estimate(spec_path, rp_path, sp_path, persons_path, regions_path, out_path,
                          start_path, tol, max_iter, deterministic, threads);
    if (tg->parsed())
      return cmd_tripgen(data_path, persons_path, family, covariates, intercept, fixed_theta,
                         out_path);
    if (acc->parsed())
      return cmd_accessibility(spec_path, model_path, scenario_path, persons_path, mu3, out_path);
    if (fc->parsed())
      return cmd_forecast(spec_path, model_path, tripgen_path, scenario_path, base_path,
                          population_path, mu3, out_dir);
    if (sim->parsed())
      return cmd_simulate(spec_path, scenario_path, params_path, n, trips, sp_situations, seed,
                          out_dir);
    if (val->parsed())
      return cmd_validate(spec_path, rp_path, sp_path, persons_path, regions_path, points, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
