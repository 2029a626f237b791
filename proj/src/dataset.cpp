#include "intercity/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "intercity/ini.hpp"

namespace intercity {

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw Error("missing column '" + name + "'");
}

const std::string& CsvTable::cell(size_t row, int col) const { return rows[row][col]; }

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  CsvTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (t.header.empty()) {
      t.header = cells;
    } else {
      if (cells.size() != t.header.size())
        throw Error(path + ": row " + std::to_string(lineno) + ": expected " +
                    std::to_string(t.header.size()) + " fields, got " + std::to_string(cells.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw Error(path + ": missing header row");
  return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
}

namespace {

double to_double(const std::string& s, const std::string& what, int row) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("row " + std::to_string(row) + ": unparseable " + what + " '" + s + "'");
  }
}

int to_int(const std::string& s, const std::string& what, int row) {
  double v = to_double(s, what, row);
  if (v != std::floor(v)) throw Error("row " + std::to_string(row) + ": " + what + " must be integral");
  return static_cast<int>(v);
}

bool spec_mentions_hsr(const ModelSpec& spec) {
  for (const auto& t : spec.mode_terms)
    if (t.modes.count(Mode::HSR)) return true;
  return false;
}

std::set<Mode> universe_for(DataScope scope, const ModelSpec& spec) {
  std::set<Mode> u(kRpUniverse.begin(), kRpUniverse.end());
  if (scope == DataScope::SP && spec_mentions_hsr(spec)) u.insert(Mode::HSR);
  return u;
}

}  // namespace

PersonTable load_persons(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_id = t.column("id"), c_age = t.column("age"), c_gender = t.column("gender");
  int c_marital = t.column("marital"), c_occ = t.column("occupation"), c_edu = t.column("education");
  int c_inc = t.column("income"), c_work = t.column("working"), c_home = t.column("home_region");
  PersonTable persons;
  std::set<std::string> seen;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    int row = static_cast<int>(i) + 2;  // header is row 1
    Person p;
    p.id = t.cell(i, c_id);
    if (!seen.insert(p.id).second)
      throw Error("row " + std::to_string(row) + ": duplicate person id '" + p.id + "'");
    p.age = to_double(t.cell(i, c_age), "age", row);
    if (p.age < 18) throw Error("row " + std::to_string(row) + ": age below survey minimum of 18");
    const std::string& g = t.cell(i, c_gender);
    if (g != "male" && g != "female")
      throw Error("row " + std::to_string(row) + ": gender must be male or female");
    p.male = g == "male";
    p.marital = t.cell(i, c_marital);
    if (p.marital != "single" && p.marital != "married" && p.marital != "other")
      throw Error("row " + std::to_string(row) + ": marital must be single/married/other");
    p.occupation_class = to_int(t.cell(i, c_occ), "occupation", row);
    p.education = to_int(t.cell(i, c_edu), "education", row);
    p.income = to_double(t.cell(i, c_inc), "income", row);
    if (p.income < 0) throw Error("row " + std::to_string(row) + ": income out of range");
    p.working = to_int(t.cell(i, c_work), "working", row) != 0;
    p.home_region = to_int(t.cell(i, c_home), "home_region", row);
    persons.push_back(std::move(p));
  }
  return persons;
}

RegionTable load_regions(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_id = t.column("id"), c_name = t.column("name"), c_gdp = t.column("gdp");
  int c_tour = t.column("tourists"), c_attr = t.column("attraction"), c_dist = t.column("distance_km");
  RegionTable regions;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    int row = static_cast<int>(i) + 2;
    Region r;
    r.id = to_int(t.cell(i, c_id), "region id", row);
    r.name = t.cell(i, c_name);
    r.gdp = to_double(t.cell(i, c_gdp), "gdp", row);
    if (r.gdp <= 0) throw Error("row " + std::to_string(row) + ": gdp must be positive");
    r.tourist_count = to_double(t.cell(i, c_tour), "tourists", row);
    r.attraction_score = to_double(t.cell(i, c_attr), "attraction", row);
    r.distance_from_origin = to_double(t.cell(i, c_dist), "distance_km", row);
    if (r.distance_from_origin < 0) throw Error("row " + std::to_string(row) + ": negative distance");
    regions.push_back(std::move(r));
  }
  return regions;
}

const Region& region_by_id(const RegionTable& regions, int id) {
  for (const auto& r : regions)
    if (r.id == id) return r;
  throw Error("unknown region id " + std::to_string(id));
}

const Person& person_by_id(const PersonTable& persons, const std::string& id) {
  for (const auto& p : persons)
    if (p.id == id) return p;
  throw Error("unknown person id '" + id + "'");
}

namespace {

struct RawRow {
  int file_row = 0;
  int dest_region = 0;
  Mode mode = Mode::Bus;
  bool chosen = false;
  std::map<std::string, double> attrs;
};

// Assembles grouped long-format rows into one Observation.
Observation assemble_observation(const std::string& obs_id, const std::vector<RawRow>& raws,
                                 const Person& person, const RegionTable& regions,
                                 const ModelSpec& spec, DataScope scope,
                                 const std::map<std::string, double>& extra_context,
                                 const std::map<int, std::map<std::string, double>>& dest_attrs) {
  Observation obs;
  obs.id = obs_id;
  obs.person_id = person.id;
  obs.purpose = spec.purpose;
  obs.scope = scope;
  obs.context = person.covariates();
  for (const auto& [k, v] : extra_context) obs.context[k] = v;

  std::set<Mode> universe = universe_for(scope, spec);
  std::vector<int> dest_order;
  std::map<int, std::vector<const RawRow*>> by_dest;
  for (const auto& r : raws) {
    if (!by_dest.count(r.dest_region)) dest_order.push_back(r.dest_region);
    by_dest[r.dest_region].push_back(&r);
  }

  int chosen_dest = -1, chosen_mode = -1;
  for (int rid : dest_order) {
    const Region& region = region_by_id(regions, rid);
    std::set<Mode> allowed = build_choice_set(region.distance_from_origin, universe, scope, spec.rules);
    DestAlt d;
    d.region = rid;
    d.distance_km = region.distance_from_origin;
    auto da = dest_attrs.find(rid);
    if (da != dest_attrs.end()) d.attrs = da->second;
    d.attrs["log_gdp"] = region.attribute("log_gdp");
    d.attrs["tourists"] = region.tourist_count;
    d.attrs["attraction"] = region.attraction_score;
    d.attrs["distance"] = region.distance_from_origin;
    std::set<Mode> present;
    for (const RawRow* r : by_dest[rid]) {
      if (!allowed.count(r->mode)) {
        if (r->chosen)
          throw Error("observation '" + obs_id + "' row " + std::to_string(r->file_row) +
                      ": chosen mode " + to_string(r->mode) + " not in choice set");
        throw Error("observation '" + obs_id + "' row " + std::to_string(r->file_row) + ": mode " +
                    to_string(r->mode) + " not in the generated choice set");
      }
      if (!present.insert(r->mode).second)
        throw Error("observation '" + obs_id + "': duplicate alternative " + to_string(r->mode) +
                    " for destination " + std::to_string(rid));
      ModeAlt alt;
      alt.mode = r->mode;
      alt.attrs = r->attrs;
      for (const auto& [k, v] : alt.attrs)
        if (!std::isfinite(v) || v < 0)
          throw Error("observation '" + obs_id + "' row " + std::to_string(r->file_row) +
                      ": attribute '" + k + "' must be finite and non-negative");
      if (r->chosen) {
        if (chosen_dest != -1) throw Error("observation '" + obs_id + "': multiple chosen rows");
        chosen_dest = static_cast<int>(obs.dests.size());
        chosen_mode = static_cast<int>(d.modes.size());
      }
      d.modes.push_back(std::move(alt));
    }
    for (Mode m : allowed)
      if (!present.count(m))
        throw Error("observation '" + obs_id + "': incomplete alternative block, missing " +
                    to_string(m) + " for destination " + std::to_string(rid));
    obs.dests.push_back(std::move(d));
  }
  if (chosen_dest == -1) throw Error("observation '" + obs_id + "': no chosen row");
  obs.chosen_dest = chosen_dest;
  obs.chosen_mode = chosen_mode;
  return obs;
}

}  // namespace

RPDataset load_rp_dataset(const std::string& path, const PersonTable& persons,
                          const RegionTable& regions, const ModelSpec& spec) {
  CsvTable t = read_csv(path);
  int c_obs = t.column("obs_id"), c_person = t.column("person_id"), c_purpose = t.column("purpose");
  int c_dest = t.column("dest_region"), c_mode = t.column("mode"), c_chosen = t.column("chosen");
  int c_cost = t.column("cost"), c_ivt = t.column("ivt"), c_access = t.column("access");
  int c_season = t.column("season"), c_party = t.column("travel_party");

  std::vector<std::string> order;
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const std::string& id = t.cell(i, c_obs);
    if (!groups.count(id)) order.push_back(id);
    groups[id].push_back(i);
  }
  RPDataset ds;
  if (order.empty()) {
    std::cerr << "warning: " << path << ": empty data section\n";
    return ds;
  }
  for (const auto& obs_id : order) {
    const auto& idx = groups[obs_id];
    size_t first = idx.front();
    const Person& person = person_by_id(persons, t.cell(first, c_person));
    if (purpose_from_string(t.cell(first, c_purpose)) != spec.purpose)
      throw Error("observation '" + obs_id + "': purpose does not match spec");
    std::map<std::string, double> extra;
    extra["summer"] = t.cell(first, c_season) == "summer" ? 1.0 : 0.0;
    extra["with_family"] = t.cell(first, c_party) == "with-family" ? 1.0 : 0.0;
    std::vector<RawRow> raws;
    for (size_t i : idx) {
      RawRow r;
      r.file_row = static_cast<int>(i) + 2;
      r.dest_region = to_int(t.cell(i, c_dest), "dest_region", r.file_row);
      r.mode = mode_from_string(t.cell(i, c_mode));
      r.chosen = to_int(t.cell(i, c_chosen), "chosen", r.file_row) != 0;
      r.attrs["cost"] = to_double(t.cell(i, c_cost), "cost", r.file_row);
      r.attrs["ivt"] = to_double(t.cell(i, c_ivt), "ivt", r.file_row);
      r.attrs["access"] = to_double(t.cell(i, c_access), "access", r.file_row);
      raws.push_back(std::move(r));
    }
    ds.observations.push_back(
        assemble_observation(obs_id, raws, person, regions, spec, DataScope::RP, extra, {}));
  }
  return ds;
}

SPDataset load_sp_dataset(const std::string& path, const PersonTable& persons,
                          const RegionTable& regions, const ModelSpec& spec) {
  CsvTable t = read_csv(path);
  int c_obs = t.column("scenario_id"), c_person = t.column("person_id"), c_purpose = t.column("purpose");
  int c_dest = t.column("dest_region"), c_mode = t.column("mode"), c_chosen = t.column("chosen");
  int c_cost = t.column("cost"), c_ivt = t.column("ivt"), c_access = t.column("access");
  int c_freq = t.column("frequency"), c_rp = t.column("rp_mode"), c_attr = t.column("attraction_eval");

  std::vector<std::string> order;
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const std::string& id = t.cell(i, c_obs);
    if (!groups.count(id)) order.push_back(id);
    groups[id].push_back(i);
  }
  SPDataset ds;
  if (order.empty()) {
    std::cerr << "warning: " << path << ": empty data section\n";
    return ds;
  }
  bool has_state_dep = std::any_of(spec.mode_terms.begin(), spec.mode_terms.end(), [](const UtilityTerm& t) {
    return t.kind == UtilityTerm::Kind::StateDep;
  });
  std::set<std::string> respondents;
  for (const auto& obs_id : order) {
    const auto& idx = groups[obs_id];
    size_t first = idx.front();
    const Person& person = person_by_id(persons, t.cell(first, c_person));
    respondents.insert(person.id);
    if (purpose_from_string(t.cell(first, c_purpose)) != spec.purpose)
      throw Error("scenario '" + obs_id + "': purpose does not match spec");
    std::vector<RawRow> raws;
    std::map<int, std::map<std::string, double>> dest_attrs;
    for (size_t i : idx) {
      RawRow r;
      r.file_row = static_cast<int>(i) + 2;
      r.dest_region = to_int(t.cell(i, c_dest), "dest_region", r.file_row);
      r.mode = mode_from_string(t.cell(i, c_mode));
      r.chosen = to_int(t.cell(i, c_chosen), "chosen", r.file_row) != 0;
      r.attrs["cost"] = to_double(t.cell(i, c_cost), "cost", r.file_row);
      r.attrs["ivt"] = to_double(t.cell(i, c_ivt), "ivt", r.file_row);
      r.attrs["access"] = to_double(t.cell(i, c_access), "access", r.file_row);
      if (!t.cell(i, c_freq).empty())
        r.attrs["frequency"] = to_double(t.cell(i, c_freq), "frequency", r.file_row);
      if (!t.cell(i, c_attr).empty())
        dest_attrs[r.dest_region]["attraction_eval"] =
            to_double(t.cell(i, c_attr), "attraction_eval", r.file_row);
      raws.push_back(std::move(r));
    }
    try {
      Observation obs = assemble_observation(obs_id, raws, person, regions, spec, DataScope::SP,
                                             {{"summer", 0.0}, {"with_family", 0.0}}, dest_attrs);
      const std::string& rp = t.cell(first, c_rp);
      if (!rp.empty()) {
        obs.has_rp_mode = true;
        obs.rp_chosen_mode = mode_from_string(rp);
      } else if (has_state_dep) {
        throw Error("scenario '" + obs_id + "': rp_mode required by state-dependence terms");
      }
      ds.observations.push_back(std::move(obs));
    } catch (const Error& e) {
      throw Error("scenario '" + obs_id + "': " + e.what());
    }
  }
  ds.respondent_count = static_cast<int>(respondents.size());
  return ds;
}

std::vector<TripGenRecord> load_tripgen_records(const std::string& path, const PersonTable& persons) {
  CsvTable t = read_csv(path);
  int c_person = t.column("person_id"), c_purpose = t.column("purpose");
  int c_count = t.column("trip_count"), c_acc = t.column("accessibility");
  std::vector<TripGenRecord> records;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    int row = static_cast<int>(i) + 2;
    TripGenRecord r;
    r.person_id = t.cell(i, c_person);
    r.purpose = purpose_from_string(t.cell(i, c_purpose));
    r.trip_count = to_int(t.cell(i, c_count), "trip_count", row);
    if (r.trip_count < 0) throw Error("row " + std::to_string(row) + ": negative trip_count");
    r.covariates = person_by_id(persons, r.person_id).covariates();
    r.covariates["accessibility"] = to_double(t.cell(i, c_acc), "accessibility", row);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace intercity
