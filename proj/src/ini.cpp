#include "intercity/ini.hpp"

#include <fstream>
#include <sstream>

namespace intercity {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string* IniSection::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

std::string IniSection::get(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw Error("section [" + name + "]: missing key '" + key + "'");
  return *v;
}

std::string IniSection::get_or(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

const IniSection* IniDoc::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

const IniSection& IniDoc::require(const std::string& name) const {
  const IniSection* s = find(name);
  if (!s) throw Error("missing section [" + name + "]");
  return *s;
}

IniDoc parse_ini(const std::string& text) {
  IniDoc doc;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error("line " + std::to_string(lineno) + ": unterminated section header");
      doc.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("line " + std::to_string(lineno) + ": expected key = value");
    if (doc.sections.empty())
      throw Error("line " + std::to_string(lineno) + ": key outside any section");
    doc.sections.back().entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return doc;
}

IniDoc load_ini(const std::string& path) { return parse_ini(read_file(path)); }

}  // namespace intercity
