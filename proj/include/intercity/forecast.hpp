#ifndef INTERCITY_FORECAST_HPP
#define INTERCITY_FORECAST_HPP

#include "intercity/nl_engine.hpp"
#include "intercity/trip_gen.hpp"

namespace intercity {

struct LevelOfService {
  double cost = 0.0;       // Mil VND
  double ivt = 0.0;        // h
  double access = 0.0;     // h
  double frequency = 0.0;  // per day
};

struct Scenario {
  std::string name;
  std::set<Mode> available;
  RegionTable regions;
  std::map<Mode, std::map<int, LevelOfService>> los;

  const LevelOfService& los_for(Mode m, int region) const;
};

Scenario load_scenario(const std::string& path);

struct DemandTable {
  std::vector<int> regions;
  std::vector<Mode> modes;
  std::map<std::pair<int, Mode>, double> trips;  // expected annual trips
  std::map<Mode, double> vmt;                    // trips x distance
  std::map<int, double> region_distance;

  double total_trips() const;
  double total_vmt() const;
  double mode_trips(Mode m) const;
};

void write_demand_table(const DemandTable& table, const std::string& path);

// Logsum accessibility: (1/mu3) ln sum_D exp(mu3 * V_d), V_d including the
// destination nest logsum, on the RP utility scale. SP-only modes (no RP
// presence) contribute through their SP coefficients, which Eq-8-style
// scaling leaves directly comparable once the mu bracket is dropped.
double accessibility(const Person& person, const Scenario& scenario,
                     const std::map<std::string, double>& params, const ModelSpec& spec,
                     double mu3 = 1.0);

DemandTable forecast_demand(const PersonTable& population, const Scenario& scenario,
                            const std::map<std::string, double>& choice_params,
                            const RegressionFit& tripgen_fit, const ModelSpec& spec,
                            double mu3 = 1.0);

struct InducedTravelReport {
  double base_trips = 0.0, alt_trips = 0.0;
  double base_vmt = 0.0, alt_vmt = 0.0;
  double delta_trips = 0.0, pct_trips = 0.0;
  double delta_vmt = 0.0, pct_vmt = 0.0;
  std::map<Mode, double> mode_delta_trips;
  std::map<Mode, double> mode_pct_trips;
  std::map<Mode, double> mode_delta_vmt;
  // Proportional attribution of mode losses to mode gains.
  std::map<Mode, std::map<Mode, double>> shift_matrix;
};

InducedTravelReport induced_travel(const DemandTable& base, const DemandTable& alt);
void write_induced_report(const InducedTravelReport& report, const std::string& path);

// Internal hook shared with accessibility/forecast: builds the choice tree
// for one person under a scenario, on the forecast (RP-scale) view of the spec.
Observation build_forecast_observation(const Person& person, const Scenario& scenario,
                                       const ModelSpec& spec);
ModelSpec forecast_view(const ModelSpec& spec);

}  // namespace intercity

#endif
