#pragma once

#include <string>
#include <vector>

#include "semicop/margins.hpp"

namespace semicop {

// Comma-delimited numeric table with a header line, '.' as the decimal point.
// Trailing blank lines are ignored; a blank line between rows is an error.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

CsvTable parse_csv(const std::string& text, const std::string& source);
// Throws DataError for unreadable files and malformed cells (with row and column).
CsvTable read_csv(const std::string& path);

// Covariate columns must be named x1..xp in order. The labeled file also needs
// a y column, in any position.
Dataset read_labeled(const std::string& path);
Matrix read_covariates(const std::string& path);
std::vector<std::string> covariate_header(Index p);

// Shortest representation that parses back to the same double.
std::string format_double(double v);
// Throws DataError when the file cannot be written.
void write_text(const std::string& path, const std::string& text);
std::string csv_text(const std::vector<std::string>& header, const Matrix& values);

}  // namespace semicop
