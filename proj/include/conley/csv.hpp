#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace conley {

// Header-first CSV table. Cells stay as text until a column is requested.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(std::string_view name) const;
  bool has_column(std::string_view name) const;
  // Parses every cell of `name` as a finite double; ParseError carries the
  // 1-based data row.
  std::vector<double> numeric_column(std::string_view name) const;
};

Table read_csv(std::istream& in);
Table read_csv_file(const std::string& path);

}  // namespace conley
