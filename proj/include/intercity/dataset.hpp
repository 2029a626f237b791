#ifndef INTERCITY_DATASET_HPP
#define INTERCITY_DATASET_HPP

#include <map>
#include <string>
#include <vector>

#include "intercity/model_spec.hpp"
#include "intercity/types.hpp"

namespace intercity {

struct ModeAlt {
  Mode mode = Mode::Bus;
  std::map<std::string, double> attrs;  // cost, ivt, access, frequency...
};

struct DestAlt {
  int region = 0;
  double distance_km = 0.0;
  std::map<std::string, double> attrs;  // per-(observation, destination) values
  std::vector<ModeAlt> modes;
};

// One choice situation: a two-level tree of destination nests over mode
// alternatives. Business SP situations carry a single nest and are read as
// a flat mode MNL by the engine.
struct Observation {
  std::string id;
  std::string person_id;
  Purpose purpose = Purpose::Business;
  DataScope scope = DataScope::RP;
  std::vector<DestAlt> dests;
  int chosen_dest = 0;  // index into dests
  int chosen_mode = 0;  // index into dests[chosen_dest].modes
  bool has_rp_mode = false;
  Mode rp_chosen_mode = Mode::Bus;  // state-dependence anchor (SP only)
  std::map<std::string, double> context;  // person covariates + summer, with_family
};

struct RPDataset {
  std::vector<Observation> observations;
};

struct SPDataset {
  std::vector<Observation> observations;
  int respondent_count = 0;
};

struct TripGenRecord {
  std::string person_id;
  Purpose purpose = Purpose::Business;
  int trip_count = 0;
  std::map<std::string, double> covariates;  // person covariates + accessibility
};

using PersonTable = std::vector<Person>;
using RegionTable = std::vector<Region>;

PersonTable load_persons(const std::string& path);
RegionTable load_regions(const std::string& path);

const Region& region_by_id(const RegionTable& regions, int id);
const Person& person_by_id(const PersonTable& persons, const std::string& id);

RPDataset load_rp_dataset(const std::string& path, const PersonTable& persons,
                          const RegionTable& regions, const ModelSpec& spec);
SPDataset load_sp_dataset(const std::string& path, const PersonTable& persons,
                          const RegionTable& regions, const ModelSpec& spec);

std::vector<TripGenRecord> load_tripgen_records(const std::string& path,
                                                const PersonTable& persons);

// Thin delimited-text layer shared by the loaders and writers.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws if absent
  const std::string& cell(size_t row, int col) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

}  // namespace intercity

#endif
