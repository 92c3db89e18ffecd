#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hmcf::harness {

// One parsed value: a bare number, a quoted string, a boolean, or a flat
// numeric list. The source line is kept for error messages.
struct ConfigValue {
  enum class Kind { number, string, boolean, list };
  Kind kind = Kind::number;
  double number = 0.0;
  std::string text;
  bool boolean = false;
  std::vector<double> list;
  int line = 0;
};

// Strict sectioned key-value document:
//
//   [section]
//   key = value        # comment
//   name = "string"
//   flag = true
//   point = [0.5, 0, 0.25]
//
// Values are numbers, double-quoted strings (no escapes), true/false, or
// flat numeric lists. Repeating a key is an error except for the designated
// accumulating keys (point, monomial, row), which collect in order. Every
// key and section must be consumed by the stage that runs, otherwise
// ensure_all_consumed reports the leftover as unknown -- typos never pass
// silently.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text, const std::string& origin);

  bool has_section(const std::string& section) const;
  bool has_key(const std::string& section, const std::string& key) const;

  // Typed getters; each consumes the key (all its occurrences). A missing
  // key or a type mismatch throws config_error with the source line.
  double get_number(const std::string& section, const std::string& key) const;
  double get_number_or(const std::string& section, const std::string& key, double fallback) const;
  long long get_integer(const std::string& section, const std::string& key) const;
  long long get_integer_or(const std::string& section, const std::string& key,
                           long long fallback) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key) const;
  std::vector<double> get_list_or(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
  // All occurrences of an accumulating key, in document order.
  std::vector<std::vector<double>> get_repeated_lists(const std::string& section,
                                                      const std::string& key) const;
  // Number-or-"inf": returns +infinity for the string form.
  double get_order(const std::string& section, const std::string& key) const;

  Eigen::VectorXd get_vector(const std::string& section, const std::string& key) const;
  Eigen::VectorXd get_vector_or(const std::string& section, const std::string& key,
                                const Eigen::VectorXd& fallback) const;

  // Marks a whole section as consumed even if no key was read from it.
  void touch_section(const std::string& section) const;
  // Throws config_error naming the first unconsumed section or key.
  void ensure_all_consumed() const;

  // Raw text lines of the document, for echoing into the manifest.
  const std::vector<std::string>& lines() const { return lines_; }
  const std::string& origin() const { return origin_; }

 private:
  struct Entry {
    std::vector<ConfigValue> values;
    mutable bool consumed = false;
  };
  struct Section {
    std::map<std::string, Entry> entries;
    mutable bool touched = false;
    int line = 0;
  };

  const ConfigValue& single(const std::string& section, const std::string& key) const;
  const Entry* find(const std::string& section, const std::string& key) const;

  std::map<std::string, Section> sections_;
  std::vector<std::string> lines_;
  std::string origin_;
};

}  // namespace hmcf::harness
