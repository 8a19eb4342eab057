#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace swnav {

// Formats a double with enough digits to round-trip, C locale, so repeated
// runs produce byte-identical files.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) {
    file_ = std::fopen(path.string().c_str(), "wb");
    if (!file_)
      throw Error(ErrorKind::io, "cannot open for writing: " + path.string());
  }
  ~CsvWriter() {
    if (file_) std::fclose(file_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void header(const std::vector<std::string>& names) { write_strings(names); }

  void row(const std::vector<double>& values) {
    std::vector<std::string> s;
    s.reserve(values.size());
    for (double v : values) s.push_back(format_double(v));
    write_strings(s);
  }

  void row_strings(const std::vector<std::string>& values) {
    write_strings(values);
  }

 private:
  void write_strings(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) line += ',';
      line += fields[i];
    }
    line += '\n';
    std::fwrite(line.data(), 1, line.size(), file_);
  }

  std::FILE* file_ = nullptr;
};

}  // namespace swnav
