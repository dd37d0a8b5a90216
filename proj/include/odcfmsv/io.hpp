#pragma once

// CSV ingestion and emission. Numbers are written with 6 significant digits.

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace odcf {

struct CsvTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // rows = periods
};

/// Header row of names, then one numeric row per period. With
/// `rescale_percent` every value is multiplied by 0.01. Errors name the
/// source, line and column.
CsvTable parse_csv(std::istream& in, const std::string& source, bool rescale_percent = false);
CsvTable read_csv(const std::string& path, bool rescale_percent = false);

/// "%.6g" with a stable representation of zero and non-finite values.
std::string format_number(double v);

void write_csv(std::ostream& out, const std::vector<std::string>& columns, const Eigen::MatrixXd& values);
void write_csv(const std::string& path, const std::vector<std::string>& columns, const Eigen::MatrixXd& values);

/// Writes text in binary mode so line endings are identical across platforms.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// Names prefix1..prefixN.
std::vector<std::string> numbered_names(const std::string& prefix, Eigen::Index n);

}  // namespace odcf
