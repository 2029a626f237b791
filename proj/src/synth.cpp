#include "intercity/synth.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "intercity/estimation.hpp"

namespace intercity {

Marginals Marginals::survey_defaults() {
  Marginals m;
  m.age = {{18, 20, 0.0603}, {20, 30, 0.3736}, {30, 40, 0.2837},
           {40, 50, 0.1207}, {50, 60, 0.1001}, {60, 75, 0.0616}};
  m.male_share = 0.5315;
  m.marital = {{"single", 0.3594}, {"married", 0.6149}, {"other", 0.0257}};
  m.occupation = {0.3748, 0.0783, 0.0783, 0.1104, 0.1887, 0.1695};
  m.education = {0.1451, 0.1861, 0.5661, 0.0501, 0.0526};
  m.income = {{0.8, 1.6, 0.1104}, {1.6, 3.0, 0.1938}, {3.0, 5.0, 0.2157}, {5.0, 10.0, 0.2798},
              {10.0, 15.0, 0.1053}, {15.0, 20.0, 0.0655}, {20.0, 30.0, 0.0295}};
  m.working_share = 0.65;
  return m;
}

void Marginals::validate() const {
  auto check = [](double total, const char* what) {
    if (std::fabs(total - 1.0) > 1e-6)
      throw Error(std::string("marginals: ") + what + " shares sum to " + std::to_string(total));
  };
  double s = 0.0;
  for (const auto& b : age) s += b.share;
  check(s, "age");
  s = 0.0;
  for (const auto& b : income) s += b.share;
  check(s, "income");
  s = 0.0;
  for (const auto& [_, v] : marital) s += v;
  check(s, "marital");
  s = 0.0;
  for (double v : occupation) s += v;
  check(s, "occupation");
  s = 0.0;
  for (double v : education) s += v;
  check(s, "education");
  if (male_share < 0 || male_share > 1 || working_share < 0 || working_share > 1)
    throw Error("marginals: shares must lie in [0, 1]");
}

namespace {

template <typename Rng>
int draw_categorical(Rng& rng, const std::vector<double>& shares) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  double acc = 0.0;
  for (size_t i = 0; i < shares.size(); ++i) {
    acc += shares[i];
    if (x < acc) return static_cast<int>(i);
  }
  return static_cast<int>(shares.size()) - 1;
}

template <typename Rng>
double draw_band(Rng& rng, const std::vector<Marginals::Band>& bands) {
  std::vector<double> shares;
  for (const auto& b : bands) shares.push_back(b.share);
  int i = draw_categorical(rng, shares);
  std::uniform_real_distribution<double> u(bands[i].lo, bands[i].hi);
  return u(rng);
}

template <typename Rng>
int sample_index(Rng& rng, const std::vector<double>& probs) {
  return draw_categorical(rng, probs);
}

}  // namespace

PersonTable simulate_population(int n, const Marginals& marginals, std::uint64_t seed) {
  marginals.validate();
  PersonTable persons;
  persons.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(mix_seed(seed, i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Person p;
    p.id = "p" + std::to_string(i + 1);
    p.age = std::floor(draw_band(rng, marginals.age));
    p.male = u(rng) < marginals.male_share;
    std::vector<double> ms;
    for (const auto& [_, v] : marginals.marital) ms.push_back(v);
    p.marital = marginals.marital[draw_categorical(rng, ms)].first;
    p.occupation_class = draw_categorical(rng, marginals.occupation) + 1;
    p.education = draw_categorical(rng, marginals.education) + 1;
    p.income = std::round(draw_band(rng, marginals.income) * 100.0) / 100.0;
    p.working = u(rng) < marginals.working_share;
    p.home_region = 1;
    persons.push_back(std::move(p));
  }
  return persons;
}

namespace {

std::set<Mode> sp_universe(const Scenario& scenario, const ModelSpec& spec) {
  std::set<Mode> u = scenario.available;
  for (const auto& t : spec.mode_terms)
    if (t.modes.count(Mode::HSR)) u.insert(Mode::HSR);
  return u;
}

void fill_region_attrs(DestAlt& d, const Region& r) {
  d.attrs["log_gdp"] = r.attribute("log_gdp");
  d.attrs["tourists"] = r.tourist_count;
  d.attrs["attraction"] = r.attraction_score;
  d.attrs["distance"] = r.distance_from_origin;
}

}  // namespace

std::pair<RPDataset, SPDataset> simulate_choices(const PersonTable& population,
                                                 const Scenario& scenario,
                                                 const std::map<std::string, double>& params_true,
                                                 const ModelSpec& spec, int trips_per_person,
                                                 std::uint64_t seed,
                                                 const SimulateOptions& options) {
  RPDataset rp;
  SPDataset sp;
  if (trips_per_person <= 0) return {rp, sp};

  ParameterVector theta = pack_parameters(spec, params_true);
  std::set<Mode> rp_universe;
  for (Mode m : kRpUniverse)
    if (scenario.available.count(m)) rp_universe.insert(m);
  std::set<Mode> spu = sp_universe(scenario, spec);

  // Three-level grids for the designed SP attributes.
  const double cost_levels[3] = {0.8, 1.0, 1.25};
  const double ivt_levels[3] = {0.8, 1.0, 1.2};
  const double freq_levels[3] = {0.5, 1.0, 1.5};

  std::set<std::string> respondents;
  for (size_t pi = 0; pi < population.size(); ++pi) {
    const Person& person = population[pi];
    std::mt19937_64 rng(mix_seed(seed, pi));
    std::uniform_real_distribution<double> u(0.0, 1.0);

    Mode first_rp_mode = Mode::Bus;
    for (int t = 0; t < trips_per_person; ++t) {
      Observation obs;
      obs.id = "rp_" + person.id + "_" + std::to_string(t + 1);
      obs.person_id = person.id;
      obs.purpose = spec.purpose;
      obs.scope = DataScope::RP;
      obs.context = person.covariates();
      obs.context["summer"] = u(rng) < 0.35 ? 1.0 : 0.0;
      obs.context["with_family"] = u(rng) < 0.4 ? 1.0 : 0.0;
      for (const auto& r : scenario.regions) {
        std::set<Mode> allowed =
            build_choice_set(r.distance_from_origin, rp_universe, DataScope::RP, spec.rules);
        DestAlt d;
        d.region = r.id;
        d.distance_km = r.distance_from_origin;
        fill_region_attrs(d, r);
        for (Mode m : allowed) {
          const LevelOfService& l = scenario.los_for(m, r.id);
          ModeAlt alt;
          alt.mode = m;
          double cj = 1.0 + options.rp_cost_jitter * (2.0 * u(rng) - 1.0);
          double tj = 1.0 + options.rp_time_jitter * (2.0 * u(rng) - 1.0);
          double aj = 1.0 + options.rp_time_jitter * (2.0 * u(rng) - 1.0);
          alt.attrs = {{"cost", l.cost * cj}, {"ivt", l.ivt * tj}, {"access", l.access * aj}};
          d.modes.push_back(std::move(alt));
        }
        obs.dests.push_back(std::move(d));
      }
      CompiledData cd = compile_observations({&obs, 1}, spec);
      TreeEvaluation tree = evaluate_choice_tree(cd.observations[0], theta.values, cd.mu_index);
      obs.chosen_dest = sample_index(rng, tree.dest_probs);
      obs.chosen_mode = sample_index(rng, tree.cond_probs[obs.chosen_dest]);
      if (t == 0) first_rp_mode = obs.dests[obs.chosen_dest].modes[obs.chosen_mode].mode;
      rp.observations.push_back(std::move(obs));
    }

    respondents.insert(person.id);
    for (int s = 0; s < options.sp_situations_per_person; ++s) {
      int cell = static_cast<int>(rng() % 27);
      double cm = cost_levels[cell % 3];
      double tm = ivt_levels[(cell / 3) % 3];
      double fm = freq_levels[cell / 9];

      Observation obs;
      obs.id = "sp_" + person.id + "_" + std::to_string(s + 1);
      obs.person_id = person.id;
      obs.purpose = spec.purpose;
      obs.scope = DataScope::SP;
      obs.context = person.covariates();
      obs.context["summer"] = 0.0;
      obs.context["with_family"] = 0.0;
      obs.has_rp_mode = true;
      obs.rp_chosen_mode = first_rp_mode;

      std::vector<const Region*> dest_regions;
      if (spec.sp_structure == SpStructure::ModeOnlyMNL) {
        dest_regions.push_back(&scenario.regions[rng() % scenario.regions.size()]);
      } else {
        for (const auto& r : scenario.regions) dest_regions.push_back(&r);
      }
      for (const Region* r : dest_regions) {
        std::set<Mode> allowed =
            build_choice_set(r->distance_from_origin, spu, DataScope::SP, spec.rules);
        DestAlt d;
        d.region = r->id;
        d.distance_km = r->distance_from_origin;
        fill_region_attrs(d, *r);
        d.attrs["attraction_eval"] = r->attraction_score + (u(rng) - 0.5);
        for (Mode m : allowed) {
          const LevelOfService& l = scenario.los_for(m, r->id);
          ModeAlt alt;
          alt.mode = m;
          alt.attrs = {{"cost", l.cost * cm},
                       {"ivt", l.ivt * tm},
                       {"access", l.access},
                       {"frequency", l.frequency * fm}};
          d.modes.push_back(std::move(alt));
        }
        obs.dests.push_back(std::move(d));
      }
      CompiledData cd = compile_observations({&obs, 1}, spec);
      TreeEvaluation tree = evaluate_choice_tree(cd.observations[0], theta.values, cd.mu_index);
      obs.chosen_dest = sample_index(rng, tree.dest_probs);
      obs.chosen_mode = sample_index(rng, tree.cond_probs[obs.chosen_dest]);
      sp.observations.push_back(std::move(obs));
    }
  }
  sp.respondent_count = static_cast<int>(respondents.size());
  return {rp, sp};
}

std::vector<LeafProb> bruteforce_prob(const Observation& obs,
                                      const std::map<std::string, double>& params,
                                      const ModelSpec& spec) {
  size_t leaves = 0;
  for (const auto& d : obs.dests) leaves += d.modes.size();
  if (leaves > 64) throw Error("bruteforce_prob: instance too large (> 64 leaves)");

  UtilityContext ctx{&obs, &params, &spec};
  bool flat = obs.scope == DataScope::SP && spec.sp_structure == SpStructure::ModeOnlyMNL;

  std::vector<LeafProb> out;
  if (flat) {
    double total = 0.0;
    std::vector<double> w(obs.dests[0].modes.size());
    for (size_t m = 0; m < w.size(); ++m) {
      w[m] = std::exp(systematic_utility(ctx, 0, static_cast<int>(m)));
      total += w[m];
    }
    for (size_t m = 0; m < w.size(); ++m)
      out.push_back({0, static_cast<int>(m), w[m] / total});
    return out;
  }

  double lam = 1.0;
  if (!spec.lambda_covariates.empty()) {
    std::vector<double> omega, k;
    for (const auto& l : spec.lambda_covariates) {
      auto it = params.find(l.coefficient);
      if (it == params.end()) throw Error("bruteforce_prob: missing parameter '" + l.coefficient + "'");
      omega.push_back(it->second);
      k.push_back(l.value(obs.context));
    }
    lam = lambda_link(omega, k);
  }

  // Direct exponential arithmetic: nest weight exp(A_d) * S_d^lambda with
  // S_d the plain sum of exp(V_m / lambda).
  double total_w = 0.0;
  std::vector<double> nest_weight(obs.dests.size());
  std::vector<std::vector<double>> mode_weight(obs.dests.size());
  for (size_t d = 0; d < obs.dests.size(); ++d) {
    double S = 0.0;
    mode_weight[d].resize(obs.dests[d].modes.size());
    for (size_t m = 0; m < obs.dests[d].modes.size(); ++m) {
      double v = systematic_utility(ctx, static_cast<int>(d), static_cast<int>(m));
      mode_weight[d][m] = std::exp(v / lam);
      S += mode_weight[d][m];
    }
    nest_weight[d] = std::exp(destination_base_utility(ctx, static_cast<int>(d))) * std::pow(S, lam);
    total_w += nest_weight[d];
    for (size_t m = 0; m < mode_weight[d].size(); ++m) mode_weight[d][m] /= S;
  }
  for (size_t d = 0; d < obs.dests.size(); ++d)
    for (size_t m = 0; m < mode_weight[d].size(); ++m)
      out.push_back({static_cast<int>(d), static_cast<int>(m),
                     nest_weight[d] / total_w * mode_weight[d][m]});
  return out;
}

RecoveryReport recovery_test(const ModelSpec& spec, const Scenario& scenario,
                             const std::map<std::string, double>& params_true, int n,
                             std::uint64_t seed, const RecoveryTolerances& tol) {
  RecoveryReport report;
  try {
    PersonTable pop = simulate_population(n, Marginals::survey_defaults(), seed);
    auto [rp, sp] = simulate_choices(pop, scenario, params_true, spec, 1, seed + 1);
    EstimationResult res = estimate(rp, sp, spec);
    report.estimation_converged = res.converged;
    auto est = res.named_estimates();
    bool all_pass = res.converged;
    auto names = spec.parameter_names();
    for (size_t i = 0; i < names.size(); ++i) {
      RecoveryReport::Entry e;
      e.name = names[i];
      e.truth = params_true.at(e.name);
      e.estimate = est.at(e.name);
      e.std_error = i < res.std_errors.size() ? res.std_errors[i] : 0.0;
      e.bias = e.estimate - e.truth;
      e.se_units = e.std_error > 0 ? std::fabs(e.bias) / e.std_error : 1e9;
      e.pass = e.se_units <= tol.se_multiple;
      all_pass = all_pass && e.pass;
      report.entries.push_back(std::move(e));
    }
    report.passed = all_pass;
  } catch (const std::exception& ex) {
    report.passed = false;
    report.failure = ex.what();
  }
  return report;
}

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(12) << v;
  return ss.str();
}

}  // namespace

void write_persons_csv(const PersonTable& persons, const std::string& path) {
  CsvTable t;
  t.header = {"id", "age", "gender", "marital", "occupation", "education", "income", "working",
              "home_region"};
  for (const auto& p : persons)
    t.rows.push_back({p.id, fmt(p.age), p.male ? "male" : "female", p.marital,
                      std::to_string(p.occupation_class), std::to_string(p.education),
                      fmt(p.income), p.working ? "1" : "0", std::to_string(p.home_region)});
  write_csv(path, t);
}

void write_regions_csv(const RegionTable& regions, const std::string& path) {
  CsvTable t;
  t.header = {"id", "name", "gdp", "tourists", "attraction", "distance_km"};
  for (const auto& r : regions)
    t.rows.push_back({std::to_string(r.id), r.name, fmt(r.gdp), fmt(r.tourist_count),
                      fmt(r.attraction_score), fmt(r.distance_from_origin)});
  write_csv(path, t);
}

void write_rp_csv(const RPDataset& rp, const std::string& path) {
  CsvTable t;
  t.header = {"obs_id", "person_id", "purpose", "dest_region", "mode", "cost", "ivt",
              "access", "chosen", "season", "travel_party"};
  for (const auto& obs : rp.observations) {
    std::string season = obs.context.count("summer") && obs.context.at("summer") > 0 ? "summer" : "other";
    std::string party =
        obs.context.count("with_family") && obs.context.at("with_family") > 0 ? "with-family" : "other";
    for (size_t d = 0; d < obs.dests.size(); ++d) {
      for (size_t m = 0; m < obs.dests[d].modes.size(); ++m) {
        const auto& alt = obs.dests[d].modes[m];
        bool chosen = static_cast<int>(d) == obs.chosen_dest && static_cast<int>(m) == obs.chosen_mode;
        t.rows.push_back({obs.id, obs.person_id, to_string(obs.purpose),
                          std::to_string(obs.dests[d].region), to_string(alt.mode),
                          fmt(alt.attrs.at("cost")), fmt(alt.attrs.at("ivt")),
                          fmt(alt.attrs.at("access")), chosen ? "1" : "0", season, party});
      }
    }
  }
  write_csv(path, t);
}

void write_sp_csv(const SPDataset& sp, const std::string& path) {
  CsvTable t;
  t.header = {"scenario_id", "person_id", "purpose", "dest_region", "mode", "cost", "ivt",
              "access", "frequency", "chosen", "rp_mode", "attraction_eval"};
  for (const auto& obs : sp.observations) {
    for (size_t d = 0; d < obs.dests.size(); ++d) {
      const auto& dest = obs.dests[d];
      std::string attraction =
          dest.attrs.count("attraction_eval") ? fmt(dest.attrs.at("attraction_eval")) : "";
      for (size_t m = 0; m < dest.modes.size(); ++m) {
        const auto& alt = dest.modes[m];
        bool chosen = static_cast<int>(d) == obs.chosen_dest && static_cast<int>(m) == obs.chosen_mode;
        t.rows.push_back({obs.id, obs.person_id, to_string(obs.purpose),
                          std::to_string(dest.region), to_string(alt.mode),
                          fmt(alt.attrs.at("cost")), fmt(alt.attrs.at("ivt")),
                          fmt(alt.attrs.at("access")),
                          alt.attrs.count("frequency") ? fmt(alt.attrs.at("frequency")) : "",
                          chosen ? "1" : "0", obs.has_rp_mode ? to_string(obs.rp_chosen_mode) : "",
                          attraction});
      }
    }
  }
  write_csv(path, t);
}

}  // namespace intercity
