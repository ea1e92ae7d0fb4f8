#include "semicop/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "semicop/error.hpp"

namespace semicop {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, const std::string& source, size_t row, size_t col,
                  const std::string& name) {
  const std::string s = trim(raw);
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    throw DataError(source + ": row " + std::to_string(row) + ", column " + std::to_string(col) + " (" +
                    name + "): '" + s + "' is not a finite number");
  return v;
}

void check_covariate_names(const std::vector<std::string>& names, const std::string& source) {
  for (size_t j = 0; j < names.size(); ++j)
    if (names[j] != "x" + std::to_string(j + 1))
      throw DataError(source + ": expected column 'x" + std::to_string(j + 1) + "', found '" + names[j] + "'");
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  CsvTable t;
  if (!std::getline(in, line)) throw DataError(source + ": missing header line");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  for (auto& h : split(line)) t.header.push_back(trim(h));
  if (t.header.empty() || (t.header.size() == 1 && t.header[0].empty()))
    throw DataError(source + ": empty header");
  const size_t cols = t.header.size();
  std::vector<double> cells;
  size_t rows = 0;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      // trailing blank lines are tolerated
      std::string rest;
      bool only_blank = true;
      while (std::getline(in, rest)) only_blank = only_blank && trim(rest).empty();
      if (!only_blank) throw DataError(source + ": row " + std::to_string(line_no - 1) + " is empty");
      break;
    }
    const auto parts = split(line);
    if (parts.size() != cols)
      throw DataError(source + ": row " + std::to_string(line_no - 1) + " has " + std::to_string(parts.size()) +
                      " cells, header has " + std::to_string(cols));
    ++rows;
    for (size_t j = 0; j < cols; ++j) cells.push_back(parse_cell(parts[j], source, rows, j + 1, t.header[j]));
  }
  t.values = Matrix(static_cast<Index>(rows), static_cast<Index>(cols));
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) t.values(static_cast<Index>(i), static_cast<Index>(j)) = cells[i * cols + j];
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), path);
}

Dataset read_labeled(const std::string& path) {
  const auto t = read_csv(path);
  Index ycol = -1;
  std::vector<std::string> xs;
  std::vector<Index> xcols;
  for (size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] == "y") {
      if (ycol >= 0) throw DataError(path + ": column 'y' appears twice");
      ycol = static_cast<Index>(j);
    } else {
      xs.push_back(t.header[j]);
      xcols.push_back(static_cast<Index>(j));
    }
  }
  if (ycol < 0) throw DataError(path + ": missing column 'y'");
  if (xs.empty()) throw DataError(path + ": missing column 'x1'");
  check_covariate_names(xs, path);
  Dataset d;
  d.labeled_y = t.values.col(ycol);
  d.labeled_x = Matrix(t.values.rows(), static_cast<Index>(xcols.size()));
  for (size_t j = 0; j < xcols.size(); ++j) d.labeled_x.col(static_cast<Index>(j)) = t.values.col(xcols[j]);
  d.unlabeled_x = Matrix(0, d.labeled_x.cols());
  return d;
}

Matrix read_covariates(const std::string& path) {
  const auto t = read_csv(path);
  check_covariate_names(t.header, path);
  return t.values;
}

std::vector<std::string> covariate_header(Index p) {
  std::vector<std::string> h;
  for (Index j = 1; j <= p; ++j) h.push_back("x" + std::to_string(j));
  return h;
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write '" + path + "'");
  f << text;
  f.close();
  if (!f) throw DataError("error while writing '" + path + "'");
}

std::string csv_text(const std::vector<std::string>& header, const Matrix& values) {
  std::string out;
  for (size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out += ',';
      out += format_double(values(i, j));
    }
    out += '\n';
  }
  return out;
}

}  // namespace semicop
