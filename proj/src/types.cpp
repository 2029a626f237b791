#include "intercity/types.hpp"

namespace intercity {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Bus: return "Bus";
    case Mode::ConventionalRail: return "ConventionalRail";
    case Mode::Airline: return "Airline";
    case Mode::LCC: return "LCC";
    case Mode::Car: return "Car";
    case Mode::HSR: return "HSR";
  }
  throw Error("unknown mode");
}

Mode mode_from_string(const std::string& s) {
  for (Mode m : kAllModes)
    if (to_string(m) == s) return m;
  if (s == "Rail") return Mode::ConventionalRail;
  throw Error("unknown mode name: '" + s + "'");
}

std::string to_string(Purpose p) {
  return p == Purpose::Business ? "Business" : "NonBusiness";
}

Purpose purpose_from_string(const std::string& s) {
  if (s == "Business") return Purpose::Business;
  if (s == "NonBusiness") return Purpose::NonBusiness;
  throw Error("unknown purpose: '" + s + "'");
}

std::string to_string(DataScope s) {
  switch (s) {
    case DataScope::RP: return "RP";
    case DataScope::SP: return "SP";
    case DataScope::All: return "All";
  }
  throw Error("unknown scope");
}

double Region::attribute(const std::string& name) const {
  if (name == "gdp") return gdp;
  if (name == "log_gdp") {
    if (gdp <= 0.0) throw Error("region " + std::to_string(id) + ": log_gdp needs gdp > 0");
    return std::log(gdp);
  }
  if (name == "tourists") return tourist_count;
  if (name == "attraction") return attraction_score;
  if (name == "distance") return distance_from_origin;
  throw Error("unknown region attribute: '" + name + "'");
}

std::map<std::string, double> Person::covariates() const {
  std::map<std::string, double> c;
  c["age"] = age;
  c["income"] = income;
  c["male"] = male ? 1.0 : 0.0;
  c["married"] = marital == "married" ? 1.0 : 0.0;
  c["single"] = marital == "single" ? 1.0 : 0.0;
  c["working"] = working ? 1.0 : 0.0;
  c["educ_univ"] = (education == 3 || education == 4) ? 1.0 : 0.0;
  c["occ_official"] = occupation_class == 1 ? 1.0 : 0.0;
  return c;
}

}  // namespace intercity
