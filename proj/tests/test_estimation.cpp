#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "intercity/estimation.hpp"
#include "intercity/synth.hpp"

using namespace intercity;

namespace {

// Two-alternative MNL with a single constant: the MLE is log-odds of the share.
ModelSpec two_alt_spec() {
  return parse_model_spec(
      "[model]\n"
      "purpose = NonBusiness\n"
      "sp_structure = NestedDestinationMode\n"
      "[mode_terms]\n"
      "asc_bus = const; asc; Bus; All\n"
      "[normalization]\n"
      "base_mode = Car\n"
      "scale = none\n");
}

Observation two_alt_obs(bool chose_bus) {
  Observation obs;
  obs.scope = DataScope::RP;
  DestAlt d;
  d.region = 1;
  d.distance_km = 400;
  d.modes.push_back({Mode::Bus, {}});
  d.modes.push_back({Mode::Car, {}});
  obs.dests.push_back(d);
  obs.chosen_dest = 0;
  obs.chosen_mode = chose_bus ? 0 : 1;
  return obs;
}

}  // namespace

TEST_CASE("closed-form MLE: constant equals the log-odds of the share") {
  RPDataset rp;
  for (int i = 0; i < 73; ++i) rp.observations.push_back(two_alt_obs(true));
  for (int i = 0; i < 27; ++i) rp.observations.push_back(two_alt_obs(false));
  EstimationResult r = estimate(rp, SPDataset{}, two_alt_spec());
  REQUIRE(r.converged);
  CHECK(r.estimates.at("asc_bus") == doctest::Approx(std::log(73.0 / 27.0)).epsilon(1e-8));
  CHECK(r.ll0 == doctest::Approx(100 * std::log(0.5)).epsilon(1e-12));
  // SE of a binomial log-odds: sqrt(1/(np) + 1/(n(1-p)))
  CHECK(r.std_errors[0] ==
        doctest::Approx(std::sqrt(1.0 / 73 + 1.0 / 27)).epsilon(1e-4));
}

TEST_CASE("starting at the truth of simulated data converges fast") {
  ModelSpec spec = testing::business_spec();
  Scenario scenario = testing::base_scenario();
  auto truth = testing::business_truth();
  PersonTable pop = simulate_population(300, Marginals::survey_defaults(), 71);
  auto [rp, sp] = simulate_choices(pop, scenario, truth, spec, 1, 72);

  // start at the finite-sample MLE, not the population truth: estimate once,
  // then re-start from the answer
  EstimateControls controls;
  controls.compute_std_errors = false;
  EstimationResult first = estimate(rp, sp, spec, std::nullopt, controls);
  REQUIRE(first.converged);
  EstimationResult again = estimate(rp, sp, spec, first.estimates, controls);
  CHECK(again.converged);
  CHECK(again.iterations <= 5);
  CHECK(again.ll1 == doctest::Approx(first.ll1).epsilon(1e-10));
}

TEST_CASE("results document round-trips") {
  RPDataset rp;
  for (int i = 0; i < 40; ++i) rp.observations.push_back(two_alt_obs(i % 3 != 0));
  EstimationResult r = estimate(rp, SPDataset{}, two_alt_spec());
  std::string path =
      (std::filesystem::temp_directory_path() / "intercity_results_roundtrip.json").string();
  write_results(r, path);
  EstimationResult back = read_results(path);
  CHECK(back.spec_digest == r.spec_digest);
  CHECK(back.ll0 == r.ll0);
  CHECK(back.ll1 == r.ll1);
  CHECK(back.rho == r.rho);
  REQUIRE(back.estimates.values.size() == r.estimates.values.size());
  CHECK(back.estimates.at("asc_bus") == r.estimates.at("asc_bus"));
  CHECK(back.std_errors == r.std_errors);
  CHECK(back.converged == r.converged);
}

TEST_CASE("results table prints significance codes") {
  RPDataset rp;
  for (int i = 0; i < 400; ++i) rp.observations.push_back(two_alt_obs(i % 4 != 0));
  EstimationResult r = estimate(rp, SPDataset{}, two_alt_spec());
  std::ostringstream out;
  print_results_table(r, out);
  std::string table = out.str();
  CHECK(table.find("asc_bus") != std::string::npos);
  CHECK(table.find("***") != std::string::npos);  // share 0.75 over 400 obs is overwhelming
  CHECK(table.find("Significant codes") != std::string::npos);
  CHECK(table.find("rho") != std::string::npos);
}

TEST_CASE("attribute rescaling divides the coefficient, t-ratio invariant") {
  ModelSpec spec = parse_model_spec(
      "[model]\n"
      "purpose = NonBusiness\n"
      "sp_structure = NestedDestinationMode\n"
      "[mode_terms]\n"
      "v = alt; v; all; All\n"
      "[normalization]\n"
      "base_mode = Car\n"
      "scale = none\n");
  RPDataset rp;
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 150; ++i) {
    Observation obs = testing::tiny_observation();
    for (auto& d : obs.dests)
      for (auto& m : d.modes) m.attrs["v"] = u(rng);
    obs.chosen_dest = i % 2;
    obs.chosen_mode = 0;
    rp.observations.push_back(obs);
  }
  EstimationResult r1 = estimate(rp, SPDataset{}, spec);
  REQUIRE(r1.converged);

  RPDataset scaled = rp;
  for (auto& obs : scaled.observations)
    for (auto& d : obs.dests)
      for (auto& m : d.modes) m.attrs["v"] *= 10.0;
  EstimationResult r2 = estimate(scaled, SPDataset{}, spec);
  REQUIRE(r2.converged);

  int i = r1.estimates.layout.at("v");
  CHECK(r2.estimates.at("v") == doctest::Approx(r1.estimates.at("v") / 10.0).epsilon(1e-5));
  CHECK(r2.t_stats[i] == doctest::Approx(r1.t_stats[i]).epsilon(1e-4));
}

TEST_CASE("spec digest is stable and discriminating") {
  CHECK(spec_digest(testing::business_spec()) == spec_digest(testing::business_spec()));
  CHECK(spec_digest(testing::business_spec()) != spec_digest(testing::nonbusiness_spec()));
}
