#ifndef TESTS_HELPERS_HPP
#define TESTS_HELPERS_HPP

#include <map>
#include <string>

#include "intercity/forecast.hpp"
#include "intercity/model_spec.hpp"
#include "intercity/synth.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(FIXTURES_DIR) + "/" + name; }

inline intercity::ModelSpec business_spec() {
  return intercity::load_model_spec(fixture("business.spec"));
}

inline intercity::ModelSpec nonbusiness_spec() {
  return intercity::load_model_spec(fixture("nonbusiness.spec"));
}

inline intercity::Scenario base_scenario() { return intercity::load_scenario(fixture("base.scn")); }
inline intercity::Scenario hsr_scenario() { return intercity::load_scenario(fixture("hsr.scn")); }

// True parameter points used by the recovery and simulation fixtures.
inline std::map<std::string, double> business_truth(double mu = 4.67) {
  return {{"b_gdp", 0.9},      {"b_cost", -1.0},    {"b_ivt", -0.05},  {"b_access", -0.1},
          {"asc_bus", -0.5},   {"asc_rail", -0.3},  {"asc_air", 0.4},  {"asc_car", 0.2},
          {"asc_air_sp", 0.3}, {"asc_hsr_sp", 0.5}, {"sd_air", 0.8},   {"sd_lcc", 0.6},
          {"lam_const", 0.3},  {"lam_occ_age", 0.005}, {"lam_educ_inc", 0.02},
          {"log_mu", std::log(mu)}};
}

inline std::map<std::string, double> nonbusiness_truth(double mu = 0.27) {
  return {{"g_tourists", 0.08}, {"summer_d2", 0.2},  {"summer_d3", 0.35}, {"summer_d4", 0.5},
          {"summer_d5", 0.25},  {"summer_d6", 0.3},  {"summer_d7", 0.2},  {"g_attract", 0.15},
          {"g_cost", -0.9},     {"g_ivt", -0.06},    {"inc_bus", -0.04},  {"inc_rail", -0.02},
          {"inc_air", 0.015},   {"inc_car", 0.01},   {"inc_hsr", 0.02},   {"asc_bus", 0.3},
          {"asc_rail", 0.1},    {"asc_air", -0.2},   {"asc_car", 0.5},    {"asc_bus_sp", 0.2},
          {"asc_rail_sp", 0.1}, {"asc_air_sp", -0.1}, {"asc_car_sp", 0.4}, {"asc_hsr_sp", 0.3},
          {"sd_bus", 0.5},      {"sd_rail", 0.4},    {"sd_air", 0.6},     {"sd_car", 0.7},
          {"lam_const", 0.4},   {"lam_married_age", 0.004}, {"lam_inc_family", 0.01},
          {"lam_working", 0.2}, {"log_mu", std::log(mu)}};
}

// Bare two-destination instance used by the worked engine examples:
// d1 = {V=1, V=0}, d2 = {V=0.5}, all destination attributes zero.
inline intercity::ModelSpec tiny_spec() {
  return intercity::parse_model_spec(
      "[model]\n"
      "purpose = NonBusiness\n"
      "sp_structure = NestedDestinationMode\n"
      "[mode_terms]\n"
      "v = alt; v; all; All\n"
      "[lambda]\n"
      "lam_const = const\n"
      "[normalization]\n"
      "base_mode = Car\n"
      "scale = none\n");
}

inline intercity::Observation tiny_observation() {
  intercity::Observation obs;
  obs.id = "tiny";
  obs.person_id = "p";
  obs.purpose = intercity::Purpose::NonBusiness;
  obs.scope = intercity::DataScope::RP;
  intercity::DestAlt d1;
  d1.region = 1;
  d1.distance_km = 400;
  d1.modes.push_back({intercity::Mode::Bus, {{"v", 1.0}}});
  d1.modes.push_back({intercity::Mode::Car, {{"v", 0.0}}});
  intercity::DestAlt d2;
  d2.region = 2;
  d2.distance_km = 400;
  d2.modes.push_back({intercity::Mode::Bus, {{"v", 0.5}}});
  obs.dests = {d1, d2};
  obs.chosen_dest = 0;
  obs.chosen_mode = 0;
  return obs;
}

}  // namespace testing

#endif
