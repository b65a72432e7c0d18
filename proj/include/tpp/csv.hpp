#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tpp/errors.hpp"

namespace tpp {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Simple CSV writer: '.' decimal, '\n' line endings, header row first.
class CsvWriter {
public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw FormatError("cannot open '" + path + "' for writing");
  }

  void header(const std::vector<std::string>& cols) { write_row(cols); }

  void row(const std::vector<std::string>& cols) { write_row(cols); }

  void numeric_row(const std::vector<double>& vals) {
    std::vector<std::string> cols;
    cols.reserve(vals.size());
    for (double v : vals) cols.push_back(format_double(v));
    write_row(cols);
  }

private:
  void write_row(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out_ << ',';
      out_ << cols[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
};

// One row per filter: class name, flattened weights, then bias.
inline void write_filters_csv(const std::string& path,
                              const std::vector<std::string>& classes,
                              const std::vector<Eigen::VectorXd>& filters,
                              const Eigen::VectorXd& biases) {
  if (filters.empty() || classes.size() != filters.size())
    throw DimensionMismatch("write_filters_csv: class/filter count mismatch");
  CsvWriter csv(path);
  std::vector<std::string> head{"class"};
  for (Eigen::Index i = 0; i < filters[0].size(); ++i)
    head.push_back("w_" + std::to_string(i));
  head.push_back("bias");
  csv.header(head);
  for (std::size_t k = 0; k < filters.size(); ++k) {
    std::vector<std::string> row{classes[k]};
    for (Eigen::Index i = 0; i < filters[k].size(); ++i)
      row.push_back(format_double(filters[k][i]));
    row.push_back(format_double(biases.size() ? biases[k] : 0.0));
    csv.row(row);
  }
}

}  // namespace tpp
