#ifndef INTERCITY_TYPES_HPP
#define INTERCITY_TYPES_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "intercity/common.hpp"

namespace intercity {

enum class Mode { Bus, ConventionalRail, Airline, LCC, Car, HSR };

constexpr std::array<Mode, 6> kAllModes = {Mode::Bus, Mode::ConventionalRail, Mode::Airline,
                                           Mode::LCC, Mode::Car, Mode::HSR};

// HSR exists only in SP choice sets.
constexpr std::array<Mode, 5> kRpUniverse = {Mode::Bus, Mode::ConventionalRail, Mode::Airline,
                                             Mode::LCC, Mode::Car};

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

enum class Purpose { Business, NonBusiness };
enum class DataScope { RP, SP, All };
enum class SpStructure { ModeOnlyMNL, NestedDestinationMode };

std::string to_string(Purpose p);
Purpose purpose_from_string(const std::string& s);
std::string to_string(DataScope s);

struct Region {
  int id = 0;  // 1..7 in the reference configuration
  std::string name;
  double gdp = 0.0;            // 10^6 Mil VND
  double tourist_count = 0.0;  // millions
  double attraction_score = 0.0;
  double distance_from_origin = 0.0;  // km

  // Attribute lookup used by destination utility terms.
  double attribute(const std::string& name) const;
};

struct Person {
  std::string id;
  double age = 0.0;
  bool male = false;
  std::string marital;  // single / married / other
  int occupation_class = 0;  // 1 gov official or office staff .. 6 others
  int education = 0;         // 1 senior high .. 5 others (3 = bachelor, 4 = master/doctor)
  double income = 0.0;       // Mil VND / month
  bool working = false;
  int home_region = 1;

  // Derived 0/1 covariates exposed to utility and lambda-link terms.
  std::map<std::string, double> covariates() const;
};

}  // namespace intercity

#endif
