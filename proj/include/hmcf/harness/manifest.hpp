#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hmcf::harness {

// FNV-1a, 64-bit. Stable, dependency-free content digest for the manifest's
// file inventory.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t v);

// Reads a whole file as bytes (used for digesting and byte-comparison).
std::string read_file_bytes(const std::string& path);

// Creates the directory (and parents) if needed.
void ensure_directory(const std::string& path);

// Exclusive ownership of an output directory for the duration of a run.
// A second process (or a crashed run's leftover) shows up as an existing
// lock file and the run refuses to start.
class OutputLock {
 public:
  explicit OutputLock(const std::string& dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

// Plain-text run manifest: key = value lines in emission order. The file
// inventory carries an FNV-1a digest per emitted file and the final line
// digests the manifest body itself, so any post-run tampering with either
// the tables or the manifest is detectable.
class RunManifest {
 public:
  explicit RunManifest(std::string out_dir);

  void add(const std::string& key, const std::string& value);
  void add_number(const std::string& key, double value);
  void add_integer(const std::string& key, long long value);
  // Echoes the configuration document verbatim as indented lines.
  void add_config_echo(const std::vector<std::string>& lines);
  // Records path (relative to the output directory), size, and digest.
  void add_file(const std::string& relative_path);

  // Stage timing helper: records seconds elapsed since construction or the
  // previous mark under timing.<stage>.
  void mark_timing(const std::string& stage);

  // Writes <out_dir>/manifest. Every emitted file must be registered first.
  void write();

 private:
  std::string out_dir_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace hmcf::harness
