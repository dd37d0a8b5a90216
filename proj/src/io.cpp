#include "odcfmsv/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "odcfmsv/error.hpp"

namespace odcf {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& source, bool rescale_percent) {
  CsvTable out;
  std::string line;
  long line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (!have_header) {
      for (auto& c : cells) out.columns.push_back(trim(c));
      for (std::size_t j = 0; j < out.columns.size(); ++j)
        if (out.columns[j].empty())
          throw DataError(source + ": line " + std::to_string(line_no) + ", column " + std::to_string(j + 1) +
                          ": empty column name");
      have_header = true;
      continue;
    }
    if (cells.size() != out.columns.size())
      throw DataError(source + ": line " + std::to_string(line_no) + ": expected " +
                      std::to_string(out.columns.size()) + " fields, found " + std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string text = trim(cells[j]);
      char* end = nullptr;
      errno = 0;
      const double v = text.empty() ? 0.0 : std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v))
        throw DataError(source + ": line " + std::to_string(line_no) + ", column " + std::to_string(j + 1) + " (" +
                        out.columns[j] + "): '" + text + "' is not a finite number");
      row.push_back(rescale_percent ? v * 0.01 : v);
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw DataError(source + ": empty file");
  if (rows.empty()) throw DataError(source + ": header but no data rows");
  out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

CsvTable read_csv(const std::string& path, bool rescale_percent) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in, path, rescale_percent);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& columns, const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(columns.size()) != values.cols())
    throw DimensionError("write_csv: header and matrix widths differ");
  for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j];
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_number(values(i, j));
    out << '\n';
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& columns, const Eigen::MatrixXd& values) {
  std::ostringstream buf;
  write_csv(buf, columns, values);
  write_text(path, buf.str());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> numbered_names(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace odcf
