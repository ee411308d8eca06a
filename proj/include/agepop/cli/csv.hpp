#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "agepop/error.hpp"

// Minimal CSV emission: one header line, numbers with 17 significant digits
// so that re-reading reproduces the doubles exactly.

namespace agepop::cli {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path), columns_(header.size()) {
    if (!out_) throw Error("cannot open '" + path.string() + "' for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

  void row(const std::vector<double>& values) {
    if (values.size() != columns_) throw Error("CsvWriter: row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt17(values[i]);
    out_ << '\n';
  }

  /// Row whose first column is a text label.
  void labeled_row(const std::string& label, const std::vector<double>& values) {
    if (values.size() + 1 != columns_) throw Error("CsvWriter: row width does not match the header");
    out_ << label;
    for (double v : values) out_ << ',' << fmt17(v);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace agepop::cli
