#include "conley/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "conley/error.hpp"

namespace conley {

namespace {

std::vector<std::string> split_record(const std::string& line, std::size_t row) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cell.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", row);
  cells.push_back(std::move(cell));
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::size_t Table::column_index(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw InvalidInput("missing column '" + std::string(name) + "'");
}

bool Table::has_column(std::string_view name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

std::vector<double> Table::numeric_column(std::string_view name) const {
  const std::size_t col = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string_view cell = trim(rows[r][col]);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
        !std::isfinite(v)) {
      throw ParseError("column '" + std::string(name) + "' is not numeric: '" +
                           std::string(cell) + "'",
                       r + 1);
    }
    out.push_back(v);
  }
  return out;
}

Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  std::size_t row = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (line.empty()) continue;
      for (auto& h : split_record(line, 0)) t.header.emplace_back(trim(h));
      have_header = true;
      continue;
    }
    ++row;
    if (line.empty()) continue;
    auto cells = split_record(line, row);
    if (cells.size() != t.header.size()) {
      throw ParseError("expected " + std::to_string(t.header.size()) + " fields, got " +
                           std::to_string(cells.size()),
                       row);
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw InvalidInput("empty CSV input: header row required");
  return t;
}

Table read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace conley
