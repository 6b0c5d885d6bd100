#include "artifacts.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <system_error>

namespace strmlab {

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file for digest: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return fnv1a64(bytes);
}

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{})
    throw std::runtime_error("double formatting failed");
  return std::string(buf, res.ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

CsvFile::CsvFile(const std::string& path,
                 const std::vector<std::string>& columns)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i) out_.put(',');
    out_ << columns[i];
  }
  out_.put('\n');
}

CsvFile::~CsvFile() { out_.flush(); }

void CsvFile::append_field(uint64_t v, bool first) {
  if (!first) out_.put(',');
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out_.write(buf, res.ptr - buf);
}

void CsvFile::append_field(int64_t v, bool first) {
  if (!first) out_.put(',');
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out_.write(buf, res.ptr - buf);
}

void CsvFile::append_field(double v, bool first) {
  if (!first) out_.put(',');
  const std::string s = format_double(v);
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void CsvFile::append_field(const std::string& v, bool first) {
  if (!first) out_.put(',');
  out_ << v;
}

}  // namespace strmlab
