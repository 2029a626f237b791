#include "intercity/model_spec.hpp"

#include <algorithm>

#include "intercity/ini.hpp"

namespace intercity {

namespace {

// Person covariates available to lambda-link and person-attribute terms.
const std::set<std::string> kPersonSchema = {
    "age", "income", "male", "married", "single", "working",
    "educ_univ", "occ_official", "with_family", "summer"};

}  // namespace

double LambdaCovariate::value(const std::map<std::string, double>& context) const {
  double v = 1.0;
  for (const auto& a : attrs) {
    auto it = context.find(a);
    if (it == context.end()) throw Error("lambda covariate '" + coefficient + "': missing attribute '" + a + "'");
    if (!std::isfinite(it->second)) throw Error("lambda covariate '" + coefficient + "': non-finite attribute '" + a + "'");
    v *= it->second;
  }
  return v;
}

std::set<Mode> build_choice_set(double distance_km, const std::set<Mode>& universe,
                                DataScope dataset, const ChoiceSetRules& rules) {
  if (distance_km <= 0.0) throw Error("build_choice_set: distance must be positive");
  if (universe.empty()) throw Error("build_choice_set: empty universe");
  std::set<Mode> out = universe;
  std::string last_rule;
  if (distance_km < rules.short_threshold_km) {
    out.erase(Mode::Airline);
    out.erase(Mode::LCC);
    last_rule = "short-distance rule (no Airline/LCC below " +
                std::to_string(rules.short_threshold_km) + " km)";
  }
  if (distance_km > rules.long_threshold_km) {
    out.erase(Mode::Car);
    if (out.empty() || !last_rule.empty()) last_rule = "long-distance rule (no Car above " +
        std::to_string(rules.long_threshold_km) + " km)";
  }
  if (dataset == DataScope::RP && out.erase(Mode::HSR) > 0 && out.empty())
    last_rule = "RP rule (HSR unavailable in RP data)";
  if (out.empty())
    throw Error("build_choice_set: choice set emptied by " +
                (last_rule.empty() ? std::string("distance rules") : last_rule));
  return out;
}

std::vector<std::string> ModelSpec::parameter_names() const {
  std::vector<std::string> names;
  auto add = [&names](const std::string& n) {
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  };
  for (const auto& t : destination_terms) add(t.coefficient);
  for (const auto& t : mode_terms) add(t.coefficient);
  for (const auto& l : lambda_covariates) add(l.coefficient);
  if (has_scale) add(kScaleName);
  return names;
}

double ParameterVector::at(const std::string& name) const {
  auto it = layout.find(name);
  if (it == layout.end()) throw Error("unknown parameter: '" + name + "'");
  return values[it->second];
}

ParameterVector pack_parameters(const ModelSpec& spec, const std::map<std::string, double>& named) {
  auto names = spec.parameter_names();
  ParameterVector v;
  v.values.resize(names.size());
  std::vector<std::string> missing, unknown;
  for (size_t i = 0; i < names.size(); ++i) {
    v.layout[names[i]] = static_cast<int>(i);
    auto it = named.find(names[i]);
    if (it == named.end())
      missing.push_back(names[i]);
    else
      v.values[i] = it->second;
  }
  for (const auto& [k, _] : named)
    if (!v.layout.count(k)) unknown.push_back(k);
  if (!missing.empty() || !unknown.empty()) {
    std::string msg = "pack_parameters:";
    for (const auto& n : missing) msg += " missing '" + n + "'";
    for (const auto& n : unknown) msg += " unknown '" + n + "'";
    throw Error(msg);
  }
  return v;
}

std::map<std::string, double> unpack_parameters(const ParameterVector& vec, const ModelSpec& spec) {
  auto names = spec.parameter_names();
  if (vec.values.size() != names.size())
    throw Error("unpack_parameters: vector length " + std::to_string(vec.values.size()) +
                " does not match spec parameter count " + std::to_string(names.size()));
  std::map<std::string, double> out;
  for (size_t i = 0; i < names.size(); ++i) {
    auto it = vec.layout.find(names[i]);
    int idx = it != vec.layout.end() ? it->second : static_cast<int>(i);
    out[names[i]] = vec.values[idx];
  }
  return out;
}

std::vector<std::string> validate_spec(const ModelSpec& spec) {
  std::vector<std::string> diags;
  for (const auto& t : spec.mode_terms) {
    if (t.kind == UtilityTerm::Kind::Constant && t.applies_to(spec.base_mode))
      diags.push_back("base-mode constant must be fixed: term '" + t.coefficient +
                      "' places a constant on base mode " + to_string(spec.base_mode));
  }
  // A shared attribute may carry at most one generic coefficient per scope overlap.
  for (size_t i = 0; i < spec.mode_terms.size(); ++i) {
    for (size_t j = i + 1; j < spec.mode_terms.size(); ++j) {
      const auto& a = spec.mode_terms[i];
      const auto& b = spec.mode_terms[j];
      if (a.kind != UtilityTerm::Kind::AltAttr || b.kind != UtilityTerm::Kind::AltAttr) continue;
      if (a.attribute != b.attribute || a.coefficient == b.coefficient) continue;
      bool scopes_overlap = a.scope == DataScope::All || b.scope == DataScope::All || a.scope == b.scope;
      bool modes_overlap = a.modes.empty() || b.modes.empty();
      if (!modes_overlap)
        for (Mode m : a.modes)
          if (b.modes.count(m)) modes_overlap = true;
      if (scopes_overlap && modes_overlap)
        diags.push_back("attribute '" + a.attribute + "' has overlapping coefficients '" +
                        a.coefficient + "' and '" + b.coefficient + "'");
    }
  }
  for (const auto& l : spec.lambda_covariates)
    for (const auto& a : l.attrs)
      if (!kPersonSchema.count(a))
        diags.push_back("lambda covariate '" + l.coefficient + "' references unknown person attribute '" + a + "'");
  for (const auto& t : spec.mode_terms)
    if (t.kind == UtilityTerm::Kind::PersonAttr && !kPersonSchema.count(t.attribute))
      diags.push_back("mode term '" + t.coefficient + "' references unknown person attribute '" + t.attribute + "'");
  if (spec.purpose == Purpose::Business && spec.sp_structure != SpStructure::ModeOnlyMNL)
    diags.push_back("Business spec requires sp_structure = ModeOnlyMNL");
  if (spec.purpose == Purpose::NonBusiness && spec.sp_structure != SpStructure::NestedDestinationMode)
    diags.push_back("NonBusiness spec requires sp_structure = NestedDestinationMode");
  return diags;
}

namespace {

DataScope scope_from_string(const std::string& s) {
  if (s == "RP") return DataScope::RP;
  if (s == "SP") return DataScope::SP;
  if (s == "All") return DataScope::All;
  throw Error("unknown scope: '" + s + "'");
}

UtilityTerm::Kind term_kind(const std::string& s) {
  using K = UtilityTerm::Kind;
  if (s == "alt") return K::AltAttr;
  if (s == "person") return K::PersonAttr;
  if (s == "const") return K::Constant;
  if (s == "statedep") return K::StateDep;
  if (s == "region") return K::RegionAttr;
  if (s == "context") return K::ContextAttr;
  if (s == "obsdest") return K::ObsDestAttr;
  throw Error("unknown term kind: '" + s + "'");
}

// Term line: <kind>; <attribute>; <applies-to>; <scope>
// applies-to: "all", a comma-free list of mode names, or region ids.
UtilityTerm parse_term(const std::string& name, const std::string& value, bool destination) {
  auto parts = split(value, ';');
  if (parts.size() != 4)
    throw Error("term '" + name + "': expected 'kind; attribute; applies; scope'");
  UtilityTerm t;
  t.coefficient = name;
  t.kind = term_kind(parts[0]);
  t.attribute = parts[1];
  if (parts[2] != "all" && !parts[2].empty()) {
    for (const auto& tok : split(parts[2], ',')) {
      if (destination)
        t.regions.insert(std::stoi(tok));
      else
        t.modes.insert(mode_from_string(tok));
    }
  }
  t.scope = scope_from_string(parts[3]);
  return t;
}

}  // namespace

ModelSpec parse_model_spec(const std::string& text) {
  IniDoc doc = parse_ini(text);
  ModelSpec spec;
  const IniSection& model = doc.require("model");
  spec.purpose = purpose_from_string(model.get("purpose"));
  std::string sps = model.get("sp_structure");
  if (sps == "ModeOnlyMNL")
    spec.sp_structure = SpStructure::ModeOnlyMNL;
  else if (sps == "NestedDestinationMode")
    spec.sp_structure = SpStructure::NestedDestinationMode;
  else
    throw Error("unknown sp_structure: '" + sps + "'");

  if (const IniSection* s = doc.find("destination_terms"))
    for (const auto& [k, v] : s->entries) spec.destination_terms.push_back(parse_term(k, v, true));
  if (const IniSection* s = doc.find("mode_terms"))
    for (const auto& [k, v] : s->entries) spec.mode_terms.push_back(parse_term(k, v, false));
  if (const IniSection* s = doc.find("lambda")) {
    for (const auto& [k, v] : s->entries) {
      LambdaCovariate lc;
      lc.coefficient = k;
      auto parts = split(v, ';');
      if (parts.empty() || parts[0].empty()) throw Error("lambda covariate '" + k + "': empty definition");
      if (parts[0] == "const") {
        // no attrs
      } else if (parts[0] == "attr") {
        if (parts.size() != 2) throw Error("lambda covariate '" + k + "': expected 'attr; name'");
        lc.attrs = {parts[1]};
      } else if (parts[0] == "product") {
        if (parts.size() != 3) throw Error("lambda covariate '" + k + "': expected 'product; a; b'");
        lc.attrs = {parts[1], parts[2]};
      } else {
        throw Error("lambda covariate '" + k + "': unknown form '" + parts[0] + "'");
      }
      spec.lambda_covariates.push_back(std::move(lc));
    }
  }
  const IniSection& norm = doc.require("normalization");
  spec.base_mode = mode_from_string(norm.get("base_mode"));
  spec.has_scale = norm.get_or("scale", "log") != "none";
  if (const IniSection* s = doc.find("choice_set_rules")) {
    spec.rules.short_threshold_km = std::stod(s->get_or("short_threshold_km", "300"));
    spec.rules.long_threshold_km = std::stod(s->get_or("long_threshold_km", "1300"));
  }
  return spec;
}

ModelSpec load_model_spec(const std::string& path) { return parse_model_spec(read_file(path)); }

}  // namespace intercity
