#include "hmcf/harness/csv.hpp"

#include <cstdio>
#include <stdexcept>

#include "hmcf/errors.hpp"

namespace hmcf::harness {

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_integer(long long v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw config_error("cannot open output file: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

CsvWriter::~CsvWriter() {
  if (out_.is_open()) out_.close();
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw std::logic_error("csv row width does not match header: " + path_);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  if (out_.is_open()) {
    out_.flush();
    if (!out_) throw config_error("write failure on: " + path_);
    out_.close();
  }
}

}  // namespace hmcf::harness
