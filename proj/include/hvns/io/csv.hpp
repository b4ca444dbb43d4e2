#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hvns/errors.hpp"
#include "hvns/record.hpp"

namespace hvns::io {

/// Shortest-safe text form: 17 significant digits round-trips every double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Column header of the diagnostics CSV, units in brackets.
inline constexpr const char* kRecordHeader =
    "t [time],energy [||u||^2],enstrophy [||u||_1^2],hyper [||A^(l/2)u||^2],injection [(f,u)],"
    "budget_residual [||u||^2]";

inline std::string record_line(const DiagnosticsRecord& r) {
  return format_double(r.t) + "," + format_double(r.energy) + "," + format_double(r.enstrophy) + "," +
         format_double(r.hyper) + "," + format_double(r.injection) + "," + format_double(r.budget_residual);
}

/// Streaming writer for one diagnostics file. Leading `comments` become "# " lines.
class RecordCsvWriter {
 public:
  explicit RecordCsvWriter(const std::string& path, const std::vector<std::string>& comments = {})
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open " + path + " for writing");
    for (const auto& c : comments) out_ << "# " << c << '\n';
    out_ << kRecordHeader << '\n';
    check();
  }

  void operator()(const DiagnosticsRecord& r) {
    out_ << record_line(r) << '\n';
    check();
  }

  void close() {
    out_.close();
    if (out_.fail()) throw IoError("error closing " + path_);
  }

  const std::string& path() const { return path_; }

 private:
  void check() {
    if (!out_) throw IoError("write failed on " + path_);
  }

  std::string path_;
  std::ofstream out_;
};

inline void write_records_csv(const std::string& path, const std::vector<DiagnosticsRecord>& records,
                              const std::vector<std::string>& comments = {}) {
  RecordCsvWriter w(path, comments);
  for (const auto& r : records) w(r);
  w.close();
}

namespace detail {

inline double parse_field(const std::string& s, std::size_t line) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw IoError("csv line " + std::to_string(line) + ": bad number \"" + s + "\"");
  return x;
}

}  // namespace detail

/// Parses diagnostics CSV text produced by RecordCsvWriter.
inline std::vector<DiagnosticsRecord> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  bool header = false;
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kRecordHeader) throw IoError("csv line " + std::to_string(n) + ": unexpected header");
      header = true;
      continue;
    }
    std::vector<double> v;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) v.push_back(detail::parse_field(cell, n));
    if (v.size() != 6) throw IoError("csv line " + std::to_string(n) + ": expected 6 columns");
    out.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
  }
  if (!header) throw IoError("csv: missing header");
  return out;
}

inline std::vector<DiagnosticsRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_records_csv(ss.str());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

/// Generic table: comment lines, a header row, then rows of preformatted cells.
inline void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                            const std::vector<std::vector<std::string>>& rows,
                            const std::vector<std::string>& comments = {}) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (const auto& c : comments) out << "# " << c << '\n';
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  out.close();
  if (out.fail()) throw IoError("write failed on " + path);
}

}  // namespace hvns::io
