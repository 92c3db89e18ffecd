#include "hmcf/harness/manifest.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hmcf/errors.hpp"
#include "hmcf/harness/csv.hpp"

namespace hmcf::harness {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::string bytes = read_file_bytes(path);
  return fnv1a64(bytes.data(), bytes.size());
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void ensure_directory(const std::string& path) {
  if (path.empty()) return;
  std::string accum;
  std::istringstream is(path);
  std::string part;
  if (path[0] == '/') accum = "/";
  while (std::getline(is, part, '/')) {
    if (part.empty()) continue;
    accum += part;
    if (mkdir(accum.c_str(), 0755) != 0 && errno != EEXIST)
      throw config_error("cannot create directory: " + accum);
    accum += "/";
  }
}

OutputLock::OutputLock(const std::string& dir) : path_(dir + "/.lock") {
  ensure_directory(dir);
  fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd_ < 0) {
    if (errno == EEXIST)
      throw config_error("output directory is locked by another run (remove " + path_ +
                         " if that run is dead): " + dir);
    throw config_error("cannot create lock file: " + path_);
  }
  char pid[32];
  std::snprintf(pid, sizeof(pid), "%ld\n", static_cast<long>(::getpid()));
  ssize_t unused = ::write(fd_, pid, std::char_traits<char>::length(pid));
  (void)unused;
}

OutputLock::~OutputLock() {
  if (fd_ >= 0) {
    ::close(fd_);
    ::unlink(path_.c_str());
  }
}

RunManifest::RunManifest(std::string out_dir)
    : out_dir_(std::move(out_dir)), t0_(std::chrono::steady_clock::now()) {}

void RunManifest::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void RunManifest::add_number(const std::string& key, double value) {
  add(key, csv_number(value));
}

void RunManifest::add_integer(const std::string& key, long long value) {
  add(key, csv_integer(value));
}

void RunManifest::add_config_echo(const std::vector<std::string>& lines) {
  add("config.lines", csv_integer(static_cast<long long>(lines.size())));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    char key[32];
    std::snprintf(key, sizeof(key), "config.%04zu", i + 1);
    add(key, lines[i]);
  }
}

void RunManifest::add_file(const std::string& relative_path) {
  std::string full = out_dir_ + "/" + relative_path;
  std::string bytes = read_file_bytes(full);
  add("file." + relative_path + ".bytes", csv_integer(static_cast<long long>(bytes.size())));
  add("file." + relative_path + ".fnv1a64", hex64(fnv1a64(bytes.data(), bytes.size())));
}

void RunManifest::mark_timing(const std::string& stage) {
  auto now = std::chrono::steady_clock::now();
  double sec = std::chrono::duration<double>(now - t0_).count();
  t0_ = now;
  add_number("timing." + stage + ".seconds", sec);
}

void RunManifest::write() {
  std::ostringstream body;
  for (const auto& [k, v] : entries_) body << k << " = " << v << "\n";
  std::string text = body.str();
  std::uint64_t digest = fnv1a64(text.data(), text.size());
  std::string path = out_dir_ + "/manifest";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write manifest: " + path);
  out << text << "manifest.fnv1a64 = " << hex64(digest) << "\n";
  out.flush();
  if (!out) throw config_error("write failure on manifest: " + path);
}

}  // namespace hmcf::harness
