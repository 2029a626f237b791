#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "intercity/forecast.hpp"

using namespace intercity;

namespace {

ModelSpec empty_spec() {
  return parse_model_spec(
      "[model]\n"
      "purpose = NonBusiness\n"
      "sp_structure = NestedDestinationMode\n"
      "[normalization]\n"
      "base_mode = Car\n"
      "scale = none\n");
}

Scenario uniform_scenario(int num_regions) {
  Scenario s;
  s.name = "uniform";
  s.available = {Mode::Bus, Mode::Car};
  for (int i = 1; i <= num_regions; ++i) {
    Region r;
    r.id = i;
    r.name = "r" + std::to_string(i);
    r.gdp = 100;
    r.tourist_count = 1;
    r.attraction_score = 1;
    r.distance_from_origin = 400;
    s.regions.push_back(r);
    s.los[Mode::Bus][i] = {0.2, 8.0, 0.3, 10};
    s.los[Mode::Car][i] = {0.4, 6.5, 0.1, 24};
  }
  return s;
}

RegressionFit constant_tripgen(double trips) {
  RegressionFit fit;
  fit.family = RegressionFit::Family::Linear;
  fit.names = {"(Intercept)"};
  fit.coefficients = {trips};
  return fit;
}

}  // namespace

TEST_CASE("scenario fixtures load with complete level-of-service") {
  Scenario base = testing::base_scenario();
  CHECK(base.name == "base");
  CHECK(base.available.size() == 5);
  CHECK_FALSE(base.available.count(Mode::HSR));
  REQUIRE(base.regions.size() == 7);
  CHECK(base.los_for(Mode::Bus, 1).cost == doctest::Approx(0.06));
  CHECK(base.los_for(Mode::Airline, 7).frequency == doctest::Approx(6));
  CHECK_THROWS_AS((void)base.los_for(Mode::Bus, 42), Error);

  Scenario hsr = testing::hsr_scenario();
  CHECK(hsr.available.count(Mode::HSR) == 1);
  CHECK(hsr.los_for(Mode::HSR, 4).ivt == doctest::Approx(0.5 + 800.0 / 250.0));
}

TEST_CASE("scenario loader rejects incomplete LOS") {
  std::string text =
      "[scenario]\nname = broken\n[modes]\navailable = Bus, Car\n"
      "[regions]\n1 = A; 100; 1; 1; 400\n"
      "[los Bus]\n1 = 0.2; 8; 0.3; 10\n";  // Car LOS missing
  auto path = std::filesystem::temp_directory_path() / "broken.scn";
  std::ofstream(path) << text;
  CHECK_THROWS_WITH_AS((void)load_scenario(path.string()), doctest::Contains("Car"), Error);
}

TEST_CASE("forecast_view rescopes the spec to the RP scale") {
  ModelSpec view = forecast_view(testing::nonbusiness_spec());
  bool has_statedep = false, has_hsr_const = false, has_sp_dest = false, has_sp_rp_const = false;
  for (const auto& t : view.mode_terms) {
    if (t.kind == UtilityTerm::Kind::StateDep) has_statedep = true;
    if (t.coefficient == "asc_hsr_sp") {
      has_hsr_const = true;
      CHECK(t.scope == DataScope::RP);
    }
    if (t.coefficient == "asc_bus_sp") has_sp_rp_const = true;
  }
  for (const auto& t : view.destination_terms)
    if (t.coefficient == "g_attract") has_sp_dest = true;
  CHECK_FALSE(has_statedep);
  CHECK(has_hsr_const);        // HSR exists only through its SP coefficients
  CHECK_FALSE(has_sp_rp_const);  // SP duplicates of RP modes drop out
  CHECK_FALSE(has_sp_dest);
  // inc_hsr is also HSR-only and survives
  bool has_inc_hsr = false;
  for (const auto& t : view.mode_terms)
    if (t.coefficient == "inc_hsr") has_inc_hsr = true;
  CHECK(has_inc_hsr);
}

TEST_CASE("accessibility closed-form values on a degenerate spec") {
  ModelSpec spec = empty_spec();
  std::map<std::string, double> params;
  Person person;
  person.id = "p";
  person.age = 30;

  // all utilities zero, lambda = 1: V_d = ln |modes|
  Scenario one = uniform_scenario(1);
  CHECK(accessibility(person, one, params, spec, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Scenario two = uniform_scenario(2);
  CHECK(accessibility(person, two, params, spec, 1.0) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  // mu3 = 0.5: (1/0.5) ln sum exp(0.5 ln 2)
  double expect = 2.0 * std::log(2.0 * std::exp(0.5 * std::log(2.0)));
  CHECK(accessibility(person, two, params, spec, 0.5) == doctest::Approx(expect).epsilon(1e-12));

  // monotone in the destination set
  Scenario three = uniform_scenario(3);
  CHECK(accessibility(person, three, params, spec, 1.0) >=
        accessibility(person, two, params, spec, 1.0));

  CHECK_THROWS_AS((void)accessibility(person, two, params, spec, 0.0), Error);
}

TEST_CASE("forecast_demand uniform allocation and conservation") {
  ModelSpec spec = empty_spec();
  std::map<std::string, double> params;
  PersonTable pop(1);
  pop[0].id = "p1";
  pop[0].age = 30;

  Scenario s = uniform_scenario(2);
  DemandTable t = forecast_demand(pop, s, params, constant_tripgen(4.0), spec);
  CHECK(t.total_trips() == doctest::Approx(4.0).epsilon(1e-12));
  for (int r = 1; r <= 2; ++r)
    for (Mode m : {Mode::Bus, Mode::Car})
      CHECK(t.trips.at({r, m}) == doctest::Approx(1.0).epsilon(1e-12));

  // conservation with a heterogeneous population and real spec
  ModelSpec nb = testing::nonbusiness_spec();
  Scenario base = testing::base_scenario();
  auto truth = testing::nonbusiness_truth();
  PersonTable many;
  for (int i = 0; i < 5; ++i) {
    Person p;
    p.id = "q" + std::to_string(i);
    p.age = 25 + 5 * i;
    p.income = 3 + i;
    p.working = i % 2;
    p.marital = i % 2 ? "married" : "single";
    many.push_back(p);
  }
  RegressionFit tg = constant_tripgen(0.0);
  tg.names = {"(Intercept)", "accessibility"};
  tg.coefficients = {0.5, 0.12};
  DemandTable d = forecast_demand(many, base, truth, tg, nb);
  double expected = 0.0;
  for (const auto& p : many) {
    std::map<std::string, double> cov = p.covariates();
    cov["accessibility"] = accessibility(p, base, truth, nb);
    expected += predict_trips(tg, cov);
  }
  CHECK(d.total_trips() == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("raising a mode's cost lowers its share") {
  ModelSpec spec = testing::nonbusiness_spec();
  auto truth = testing::nonbusiness_truth();
  PersonTable pop(1);
  pop[0].id = "p1";
  pop[0].age = 35;
  pop[0].income = 6;

  Scenario base = testing::base_scenario();
  Scenario pricier = base;
  for (auto& [region, l] : pricier.los[Mode::Bus]) l.cost *= 3.0;

  RegressionFit tg = constant_tripgen(3.0);
  DemandTable d0 = forecast_demand(pop, base, truth, tg, spec);
  DemandTable d1 = forecast_demand(pop, pricier, truth, tg, spec);
  CHECK(d1.mode_trips(Mode::Bus) < d0.mode_trips(Mode::Bus));
}

TEST_CASE("induced travel report") {
  ModelSpec spec = empty_spec();
  std::map<std::string, double> params;
  PersonTable pop(1);
  pop[0].id = "p1";
  Scenario s = uniform_scenario(2);
  DemandTable base = forecast_demand(pop, s, params, constant_tripgen(4.0), spec);

  InducedTravelReport same = induced_travel(base, base);
  CHECK(same.delta_trips == 0.0);
  CHECK(same.delta_vmt == 0.0);
  CHECK(same.pct_trips == 0.0);
  for (const auto& [m, v] : same.mode_delta_trips) CHECK(v == 0.0);

  DemandTable doubled = base;
  for (auto& [k, v] : doubled.trips) v *= 2.0;
  for (auto& [k, v] : doubled.vmt) v *= 2.0;
  InducedTravelReport up = induced_travel(base, doubled);
  CHECK(up.pct_trips == doctest::Approx(100.0).epsilon(1e-10));
  CHECK(up.pct_vmt == doctest::Approx(100.0).epsilon(1e-10));

  DemandTable other = forecast_demand(pop, uniform_scenario(3), params, constant_tripgen(4.0), spec);
  CHECK_THROWS_AS((void)induced_travel(base, other), Error);
}

TEST_CASE("hsr introduction produces a populated shift matrix") {
  ModelSpec spec = testing::nonbusiness_spec();
  auto truth = testing::nonbusiness_truth();
  PersonTable pop;
  for (int i = 0; i < 3; ++i) {
    Person p;
    p.id = "p" + std::to_string(i);
    p.age = 30 + i;
    p.income = 5 + i;
    pop.push_back(p);
  }
  RegressionFit tg = constant_tripgen(2.0);
  DemandTable base = forecast_demand(pop, testing::base_scenario(), truth, tg, spec);
  DemandTable alt = forecast_demand(pop, testing::hsr_scenario(), truth, tg, spec);
  InducedTravelReport report = induced_travel(base, alt);
  CHECK(report.mode_delta_trips.at(Mode::HSR) > 0.0);
  bool any_shift = false;
  for (const auto& [from, row] : report.shift_matrix)
    for (const auto& [to, v] : row)
      if (v > 0.0) any_shift = true;
  CHECK(any_shift);

  auto dir = std::filesystem::temp_directory_path() / "intercity_forecast_out";
  std::filesystem::create_directories(dir);
  write_demand_table(alt, (dir / "demand.csv").string());
  write_induced_report(report, (dir / "induced.json").string());
  CHECK(std::filesystem::exists(dir / "demand.csv"));
  CHECK(std::filesystem::exists(dir / "induced.json"));
}
