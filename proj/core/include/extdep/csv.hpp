#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace extdep {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a column by name; throws DataError if absent.
  std::size_t column(std::string_view name) const;
};

// Comma-separated with a header row; double quotes may wrap fields.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

// Numeric matrix of the named columns. Empty or non-numeric fields raise a
// DataError naming the row and column.
Eigen::MatrixXd numeric_columns(const CsvTable& t, const std::vector<std::string>& names);

// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace extdep
