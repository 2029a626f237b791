#ifndef INTERCITY_INI_HPP
#define INTERCITY_INI_HPP

#include <string>
#include <utility>
#include <vector>

#include "intercity/common.hpp"

namespace intercity {

// Minimal sectioned key/value document. Preserves key order within a
// section; '#' starts a comment; keys may repeat.
struct IniSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws if absent
  std::string get_or(const std::string& key, const std::string& fallback) const;
};

struct IniDoc {
  std::vector<IniSection> sections;

  const IniSection* find(const std::string& name) const;
  const IniSection& require(const std::string& name) const;
};

IniDoc parse_ini(const std::string& text);
IniDoc load_ini(const std::string& path);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);
std::string read_file(const std::string& path);

}  // namespace intercity

#endif
