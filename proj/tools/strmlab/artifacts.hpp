#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace strmlab {

// FNV-1a 64-bit over raw bytes; used for config hashes and for the
// determinism digests of artifact files.
uint64_t fnv1a64(std::string_view bytes);
std::string hex64(uint64_t v);

// Digest of a file's bytes (throws std::runtime_error if unreadable).
uint64_t hash_file(const std::string& path);

// Shortest round-trip decimal form of a double ("1e-06"-style exponents as
// produced by std::to_chars), so artifact files are bit-stable across
// thread counts and reruns.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);

// Buffered CSV writer with deterministic number formatting.  Usage:
//   CsvFile csv(path, {"replicate", "level", "count"});
//   csv.row(r, m, n);
class CsvFile {
 public:
  CsvFile(const std::string& path, const std::vector<std::string>& columns);
  ~CsvFile();

  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;

  template <typename... Ts>
  void row(const Ts&... vals) {
    bool first = true;
    ((append_field(vals, first), first = false), ...);
    out_.put('\n');
  }

 private:
  void append_field(uint64_t v, bool first);
  void append_field(int64_t v, bool first);
  void append_field(int v, bool first) { append_field(int64_t{v}, first); }
  void append_field(unsigned v, bool first) {
    append_field(uint64_t{v}, first);
  }
  void append_field(bool v, bool first) {
    append_field(static_cast<uint64_t>(v), first);
  }
  void append_field(double v, bool first);
  void append_field(const std::string& v, bool first);
  void append_field(const char* v, bool first) {
    append_field(std::string(v), first);
  }

  std::ofstream out_;
};

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace strmlab
