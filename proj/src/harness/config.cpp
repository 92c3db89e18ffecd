#include "hmcf/harness/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "hmcf/errors.hpp"

namespace hmcf::harness {

namespace {

const char* kAccumulating[] = {"point", "monomial", "row"};

bool accumulating(const std::string& key) {
  for (const char* k : kAccumulating)
    if (key == k) return true;
  return false;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw config_error(os.str());
}

// Strips a trailing comment. '#' inside a quoted string does not count.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

double parse_number_token(const std::string& tok, const std::string& origin, int line) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    fail(origin, line, "expected a number, got '" + tok + "'");
  if (!std::isfinite(v)) fail(origin, line, "number out of range: '" + tok + "'");
  return v;
}

ConfigValue parse_value(const std::string& raw, const std::string& origin, int line) {
  ConfigValue v;
  v.line = line;
  std::string s = trim(raw);
  if (s.empty()) fail(origin, line, "missing value after '='");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      fail(origin, line, "unterminated string");
    v.kind = ConfigValue::Kind::string;
    v.text = s.substr(1, s.size() - 2);
    if (v.text.find('"') != std::string::npos)
      fail(origin, line, "strings cannot contain embedded quotes");
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = ConfigValue::Kind::boolean;
    v.boolean = (s == "true");
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') fail(origin, line, "unterminated list");
    v.kind = ConfigValue::Kind::list;
    std::string inner = s.substr(1, s.size() - 2);
    std::string item;
    std::istringstream is(inner);
    while (std::getline(is, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(origin, line, "empty list element");
      v.list.push_back(parse_number_token(item, origin, line));
    }
    if (!trim(inner).empty() && v.list.empty())
      fail(origin, line, "malformed list");
    return v;
  }
  v.kind = ConfigValue::Kind::number;
  v.number = parse_number_token(s, origin, line);
  return v;
}

const char* kind_name(ConfigValue::Kind k) {
  switch (k) {
    case ConfigValue::Kind::number: return "number";
    case ConfigValue::Kind::string: return "string";
    case ConfigValue::Kind::boolean: return "boolean";
    case ConfigValue::Kind::list: return "list";
  }
  return "?";
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream is(text);
  std::string raw;
  std::string current;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    cfg.lines_.push_back(raw);
    std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[' && s.back() == ']' && s.find('=') == std::string::npos) {
      std::string name = trim(s.substr(1, s.size() - 2));
      if (name.empty()) fail(origin, line, "empty section name");
      if (cfg.sections_.count(name))
        fail(origin, line, "duplicate section [" + name + "]");
      cfg.sections_[name].line = line;
      current = name;
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      fail(origin, line, "expected 'key = value' or '[section]'");
    if (current.empty())
      fail(origin, line, "key outside any [section]");
    std::string key = trim(s.substr(0, eq));
    if (key.empty()) fail(origin, line, "missing key before '='");
    for (char c : key)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
        fail(origin, line, "invalid key name '" + key + "'");
    ConfigValue value = parse_value(s.substr(eq + 1), origin, line);
    Entry& entry = cfg.sections_[current].entries[key];
    if (!entry.values.empty() && !accumulating(key))
      fail(origin, line, "duplicate key '" + key + "' in [" + current + "]");
    entry.values.push_back(std::move(value));
  }
  return cfg;
}

bool Config::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

bool Config::has_key(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const Config::Entry* Config::find(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  s->second.touched = true;
  auto e = s->second.entries.find(key);
  if (e == s->second.entries.end()) return nullptr;
  e->second.consumed = true;
  return &e->second;
}

const ConfigValue& Config::single(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e)
    throw config_error(origin_ + ": missing key '" + key + "' in [" + section + "]");
  if (e->values.size() != 1)
    throw config_error(origin_ + ": key '" + key + "' in [" + section +
                       "] given more than once where a single value is expected");
  return e->values.front();
}

double Config::get_number(const std::string& section, const std::string& key) const {
  const ConfigValue& v = single(section, key);
  if (v.kind != ConfigValue::Kind::number)
    fail(origin_, v.line, "'" + key + "' must be a number, got " + kind_name(v.kind));
  return v.number;
}

double Config::get_number_or(const std::string& section, const std::string& key,
                             double fallback) const {
  return has_key(section, key) ? get_number(section, key) : fallback;
}

long long Config::get_integer(const std::string& section, const std::string& key) const {
  const ConfigValue& v = single(section, key);
  if (v.kind != ConfigValue::Kind::number)
    fail(origin_, v.line, "'" + key + "' must be an integer, got " + kind_name(v.kind));
  double r = std::round(v.number);
  if (std::abs(v.number - r) > 1e-9 || std::abs(r) > 9e15)
    fail(origin_, v.line, "'" + key + "' must be an integer");
  return static_cast<long long>(r);
}

long long Config::get_integer_or(const std::string& section, const std::string& key,
                                 long long fallback) const {
  return has_key(section, key) ? get_integer(section, key) : fallback;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  const ConfigValue& v = single(section, key);
  if (v.kind != ConfigValue::Kind::string)
    fail(origin_, v.line, "'" + key + "' must be a quoted string, got " + kind_name(v.kind));
  return v.text;
}

std::string Config::get_string_or(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  return has_key(section, key) ? get_string(section, key) : fallback;
}

bool Config::get_bool_or(const std::string& section, const std::string& key,
                         bool fallback) const {
  if (!has_key(section, key)) return fallback;
  const ConfigValue& v = single(section, key);
  if (v.kind != ConfigValue::Kind::boolean)
    fail(origin_, v.line, "'" + key + "' must be true or false, got " + kind_name(v.kind));
  return v.boolean;
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
  const ConfigValue& v = single(section, key);
  if (v.kind == ConfigValue::Kind::list) return v.list;
  if (v.kind == ConfigValue::Kind::number) return {v.number};  // scalar promotes to [x]
  fail(origin_, v.line, "'" + key + "' must be a numeric list, got " + kind_name(v.kind));
}

std::vector<double> Config::get_list_or(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
  return has_key(section, key) ? get_list(section, key) : fallback;
}

std::vector<std::vector<double>> Config::get_repeated_lists(const std::string& section,
                                                            const std::string& key) const {
  const Entry* e = find(section, key);
  std::vector<std::vector<double>> out;
  if (!e) return out;
  for (const ConfigValue& v : e->values) {
    if (v.kind != ConfigValue::Kind::list)
      fail(origin_, v.line, "'" + key + "' entries must be numeric lists");
    out.push_back(v.list);
  }
  return out;
}

double Config::get_order(const std::string& section, const std::string& key) const {
  const ConfigValue& v = single(section, key);
  if (v.kind == ConfigValue::Kind::string) {
    if (v.text == "inf" || v.text == "infinity")
      return std::numeric_limits<double>::infinity();
    fail(origin_, v.line, "'" + key + "' must be a number or \"inf\"");
  }
  if (v.kind != ConfigValue::Kind::number)
    fail(origin_, v.line, "'" + key + "' must be a number or \"inf\"");
  return v.number;
}

Eigen::VectorXd Config::get_vector(const std::string& section, const std::string& key) const {
  std::vector<double> raw = get_list(section, key);
  Eigen::VectorXd v(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) v[static_cast<Eigen::Index>(i)] = raw[i];
  return v;
}

Eigen::VectorXd Config::get_vector_or(const std::string& section, const std::string& key,
                                      const Eigen::VectorXd& fallback) const {
  return has_key(section, key) ? get_vector(section, key) : fallback;
}

void Config::touch_section(const std::string& section) const {
  auto s = sections_.find(section);
  if (s != sections_.end()) s->second.touched = true;
}

void Config::ensure_all_consumed() const {
  for (const auto& [name, sec] : sections_) {
    if (!sec.touched)
      fail(origin_, sec.line, "unknown section [" + name + "]");
    for (const auto& [key, entry] : sec.entries) {
      if (!entry.consumed)
        fail(origin_, entry.values.front().line,
             "unknown key '" + key + "' in [" + name + "]");
    }
  }
}

}  // namespace hmcf::harness
