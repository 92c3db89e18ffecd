#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace hmcf::harness {

// Shortest round-trip decimal for a double (printf %.17g is byte-stable
// across runs and thread counts; that is the determinism contract for all
// emitted tables). Infinity prints as "inf".
std::string csv_number(double v);
std::string csv_integer(long long v);

// Minimal CSV emitter: fixed header, rows of preformatted cells, '\n' line
// ends, no quoting (cell content never contains commas by construction).
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();

  void row(const std::vector<std::string>& cells);
  void close();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_ = 0;
};

}  // namespace hmcf::harness
