#include "intercity/forecast.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "intercity/ini.hpp"

namespace intercity {

const LevelOfService& Scenario::los_for(Mode m, int region) const {
  auto mi = los.find(m);
  if (mi == los.end()) throw Error("scenario '" + name + "': no LOS block for " + to_string(m));
  auto ri = mi->second.find(region);
  if (ri == mi->second.end())
    throw Error("scenario '" + name + "': no LOS entry for " + to_string(m) + " in region " +
                std::to_string(region));
  return ri->second;
}

Scenario load_scenario(const std::string& path) {
  IniDoc doc = load_ini(path);
  Scenario s;
  s.name = doc.require("scenario").get("name");
  for (const auto& tok : split(doc.require("modes").get("available"), ','))
    s.available.insert(mode_from_string(tok));
  for (const auto& [key, value] : doc.require("regions").entries) {
    auto parts = split(value, ';');
    if (parts.size() != 5)
      throw Error("scenario region '" + key + "': expected 'name; gdp; tourists; attraction; distance_km'");
    Region r;
    r.id = std::stoi(key);
    r.name = parts[0];
    r.gdp = std::stod(parts[1]);
    r.tourist_count = std::stod(parts[2]);
    r.attraction_score = std::stod(parts[3]);
    r.distance_from_origin = std::stod(parts[4]);
    s.regions.push_back(std::move(r));
  }
  for (const auto& sec : doc.sections) {
    if (sec.name.rfind("los ", 0) != 0) continue;
    Mode m = mode_from_string(sec.name.substr(4));
    for (const auto& [key, value] : sec.entries) {
      auto parts = split(value, ';');
      if (parts.size() != 4)
        throw Error("scenario LOS '" + sec.name + "' region " + key +
                    ": expected 'cost; ivt; access; frequency'");
      LevelOfService l{std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]),
                       std::stod(parts[3])};
      s.los[m][std::stoi(key)] = l;
    }
  }
  // Every available mode needs complete LOS wherever the distance rules admit it.
  for (Mode m : s.available)
    for (const auto& r : s.regions) {
      auto cs = build_choice_set(r.distance_from_origin, s.available, DataScope::SP);
      if (cs.count(m)) s.los_for(m, r.id);
    }
  return s;
}

ModelSpec forecast_view(const ModelSpec& spec) {
  // Forecasting runs on the RP utility scale: generic and RP-specific terms
  // apply as estimated; SP-specific terms survive only for modes absent from
  // RP data (their pre-scale coefficients share the RP metric). State
  // dependence has no anchor in a forecast population and is dropped.
  ModelSpec out = spec;
  out.mode_terms.clear();
  for (const auto& t : spec.mode_terms) {
    if (t.kind == UtilityTerm::Kind::StateDep) continue;
    if (t.scope != DataScope::SP) {
      out.mode_terms.push_back(t);
      continue;
    }
    bool sp_only_modes = !t.modes.empty() &&
        std::all_of(t.modes.begin(), t.modes.end(), [](Mode m) { return m == Mode::HSR; });
    if (sp_only_modes) {
      UtilityTerm kept = t;
      kept.scope = DataScope::RP;
      out.mode_terms.push_back(kept);
    }
  }
  out.destination_terms.clear();
  for (const auto& t : spec.destination_terms)
    if (t.scope != DataScope::SP) out.destination_terms.push_back(t);
  return out;
}

Observation build_forecast_observation(const Person& person, const Scenario& scenario,
                                       const ModelSpec& spec) {
  Observation obs;
  obs.id = "forecast:" + person.id;
  obs.person_id = person.id;
  obs.purpose = spec.purpose;
  obs.scope = DataScope::RP;  // RP utility scale
  obs.context = person.covariates();
  obs.context["summer"] = 0.0;
  obs.context["with_family"] = 0.0;
  for (const auto& r : scenario.regions) {
    // SP dataset tag keeps prospective modes (HSR) in the set; distance
    // rules still apply.
    std::set<Mode> allowed =
        build_choice_set(r.distance_from_origin, scenario.available, DataScope::SP, spec.rules);
    DestAlt d;
    d.region = r.id;
    d.distance_km = r.distance_from_origin;
    d.attrs["log_gdp"] = r.attribute("log_gdp");
    d.attrs["tourists"] = r.tourist_count;
    d.attrs["attraction"] = r.attraction_score;
    d.attrs["distance"] = r.distance_from_origin;
    for (Mode m : allowed) {
      const LevelOfService& l = scenario.los_for(m, r.id);
      ModeAlt alt;
      alt.mode = m;
      alt.attrs = {{"cost", l.cost}, {"ivt", l.ivt}, {"access", l.access}, {"frequency", l.frequency}};
      d.modes.push_back(std::move(alt));
    }
    obs.dests.push_back(std::move(d));
  }
  if (obs.dests.empty()) throw Error("forecast: empty destination set");
  return obs;
}

namespace {

struct TreeProbs {
  std::vector<double> dest_prob;
  std::vector<std::vector<double>> mode_prob;
  std::vector<double> dest_utility;  // V_d = A_d + lambda * Gamma_d
};

TreeProbs evaluate_tree(const Person& person, const Scenario& scenario,
                        const std::map<std::string, double>& params, const ModelSpec& spec) {
  ModelSpec view = forecast_view(spec);
  Observation obs = build_forecast_observation(person, scenario, view);
  UtilityContext ctx{&obs, &params, &view};
  const size_t D = obs.dests.size();
  TreeProbs tp;
  tp.dest_prob.resize(D);
  tp.mode_prob.resize(D);
  tp.dest_utility.resize(D);

  std::vector<double> k;
  std::vector<double> omega;
  for (const auto& l : view.lambda_covariates) {
    k.push_back(l.value(obs.context));
    auto it = params.find(l.coefficient);
    if (it == params.end()) throw Error("forecast: missing parameter '" + l.coefficient + "'");
    omega.push_back(it->second);
  }
  double lam = view.lambda_covariates.empty() ? 1.0 : lambda_link(omega, k);

  for (size_t d = 0; d < D; ++d) {
    std::vector<double> v(obs.dests[d].modes.size());
    for (size_t m = 0; m < v.size(); ++m)
      v[m] = systematic_utility(ctx, static_cast<int>(d), static_cast<int>(m));
    double gamma = logsum(v, lam);
    tp.mode_prob[d].resize(v.size());
    for (size_t m = 0; m < v.size(); ++m)
      tp.mode_prob[d][m] = conditional_mode_prob(v, lam, static_cast<int>(m));
    tp.dest_utility[d] = destination_base_utility(ctx, static_cast<int>(d)) + lam * gamma;
  }
  double lse = numeric::log_sum_exp(tp.dest_utility);
  for (size_t d = 0; d < D; ++d) tp.dest_prob[d] = std::exp(tp.dest_utility[d] - lse);
  return tp;
}

}  // namespace

double accessibility(const Person& person, const Scenario& scenario,
                     const std::map<std::string, double>& params, const ModelSpec& spec,
                     double mu3) {
  if (mu3 <= 0.0) throw Error("accessibility: mu3 must be positive");
  TreeProbs tp = evaluate_tree(person, scenario, params, spec);
  std::vector<double> scaled(tp.dest_utility.size());
  for (size_t d = 0; d < scaled.size(); ++d) scaled[d] = mu3 * tp.dest_utility[d];
  return numeric::log_sum_exp(scaled) / mu3;
}

double DemandTable::total_trips() const {
  double s = 0.0;
  for (const auto& [_, v] : trips) s += v;
  return s;
}

double DemandTable::total_vmt() const {
  double s = 0.0;
  for (const auto& [_, v] : vmt) s += v;
  return s;
}

double DemandTable::mode_trips(Mode m) const {
  double s = 0.0;
  for (const auto& [key, v] : trips)
    if (key.second == m) s += v;
  return s;
}

DemandTable forecast_demand(const PersonTable& population, const Scenario& scenario,
                            const std::map<std::string, double>& choice_params,
                            const RegressionFit& tripgen_fit, const ModelSpec& spec,
                            double mu3) {
  DemandTable table;
  for (const auto& r : scenario.regions) {
    table.regions.push_back(r.id);
    table.region_distance[r.id] = r.distance_from_origin;
  }
  std::set<Mode> seen_modes;

  ModelSpec view = forecast_view(spec);
  for (const Person& person : population) {
    double acc = accessibility(person, scenario, choice_params, spec, mu3);
    auto cov = person.covariates();
    cov["accessibility"] = acc;
    double freq = predict_trips(tripgen_fit, cov);

    TreeProbs tp = evaluate_tree(person, scenario, choice_params, spec);
    Observation obs = build_forecast_observation(person, scenario, view);
    for (size_t d = 0; d < obs.dests.size(); ++d) {
      for (size_t m = 0; m < obs.dests[d].modes.size(); ++m) {
        Mode mode = obs.dests[d].modes[m].mode;
        seen_modes.insert(mode);
        double t = freq * tp.dest_prob[d] * tp.mode_prob[d][m];
        table.trips[{obs.dests[d].region, mode}] += t;
        table.vmt[mode] += t * obs.dests[d].distance_km;
      }
    }
  }
  table.modes.assign(seen_modes.begin(), seen_modes.end());
  return table;
}

void write_demand_table(const DemandTable& table, const std::string& path) {
  CsvTable t;
  t.header = {"region", "mode", "trips", "vmt"};
  auto fmt = [](double v) {
    std::ostringstream ss;
    ss << std::setprecision(15) << v;
    return ss.str();
  };
  for (int r : table.regions) {
    double dist = 0.0;
    if (auto it = table.region_distance.find(r); it != table.region_distance.end())
      dist = it->second;
    for (Mode m : table.modes) {
      auto it = table.trips.find({r, m});
      if (it == table.trips.end()) continue;
      t.rows.push_back({std::to_string(r), to_string(m), fmt(it->second), fmt(it->second * dist)});
    }
  }
  write_csv(path, t);
}

InducedTravelReport induced_travel(const DemandTable& base, const DemandTable& alt) {
  if (base.regions != alt.regions)
    throw Error("induced_travel: mismatched region sets");
  InducedTravelReport rep;
  rep.base_trips = base.total_trips();
  rep.alt_trips = alt.total_trips();
  rep.base_vmt = base.total_vmt();
  rep.alt_vmt = alt.total_vmt();
  rep.delta_trips = rep.alt_trips - rep.base_trips;
  rep.delta_vmt = rep.alt_vmt - rep.base_vmt;
  rep.pct_trips = rep.base_trips != 0.0 ? 100.0 * rep.delta_trips / rep.base_trips : 0.0;
  rep.pct_vmt = rep.base_vmt != 0.0 ? 100.0 * rep.delta_vmt / rep.base_vmt : 0.0;

  std::set<Mode> modes(base.modes.begin(), base.modes.end());
  modes.insert(alt.modes.begin(), alt.modes.end());
  double total_gain = 0.0;
  std::map<Mode, double> gains, losses;
  for (Mode m : modes) {
    double d = alt.mode_trips(m) - base.mode_trips(m);
    rep.mode_delta_trips[m] = d;
    double b = base.mode_trips(m);
    rep.mode_pct_trips[m] = b != 0.0 ? 100.0 * d / b : (d != 0.0 ? 100.0 : 0.0);
    double bv = 0.0, av = 0.0;
    if (auto it = base.vmt.find(m); it != base.vmt.end()) bv = it->second;
    if (auto it = alt.vmt.find(m); it != alt.vmt.end()) av = it->second;
    rep.mode_delta_vmt[m] = av - bv;
    if (d > 0) {
      gains[m] = d;
      total_gain += d;
    } else if (d < 0) {
      losses[m] = -d;
    }
  }
  if (total_gain > 0) {
    for (const auto& [from, loss] : losses)
      for (const auto& [to, gain] : gains) rep.shift_matrix[from][to] = loss * gain / total_gain;
  }
  return rep;
}

void write_induced_report(const InducedTravelReport& rep, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["trips"] = {{"base", rep.base_trips}, {"alt", rep.alt_trips},
                  {"delta", rep.delta_trips}, {"pct", rep.pct_trips}};
  doc["vmt"] = {{"base", rep.base_vmt}, {"alt", rep.alt_vmt},
                {"delta", rep.delta_vmt}, {"pct", rep.pct_vmt}};
  nlohmann::ordered_json per_mode;
  for (const auto& [m, d] : rep.mode_delta_trips) {
    per_mode[to_string(m)] = {{"delta_trips", d},
                              {"pct_trips", rep.mode_pct_trips.at(m)},
                              {"delta_vmt", rep.mode_delta_vmt.at(m)}};
  }
  doc["modes"] = std::move(per_mode);
  nlohmann::ordered_json shift;
  for (const auto& [from, row] : rep.shift_matrix) {
    nlohmann::ordered_json r;
    for (const auto& [to, v] : row) r[to_string(to)] = v;
    shift[to_string(from)] = std::move(r);
  }
  doc["shift_matrix"] = std::move(shift);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write report: " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace intercity
