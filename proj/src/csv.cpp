#include "fpp/csv.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "fpp/error.hpp"

namespace fpp::csv {

std::string format(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << format(values[i]);
  }
  out << '\n';
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::vector<double>> read_table(std::istream& in, std::string_view header) {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    have_header = line == header;
    break;
  }
  if (!have_header) {
    fail(ErrorKind::io, "expected CSV header \"" + std::string(header) + "\"");
  }
  std::size_t columns = 1;
  for (char ch : header) columns += ch == ',';

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const std::string t = trim(cell);
        row.push_back(std::stod(t, &used));
        if (used != t.size()) throw std::invalid_argument(t);
      } catch (const std::exception&) {
        fail(ErrorKind::io, "CSV line " + std::to_string(lineno) + ": bad number \"" + cell + "\"");
      }
    }
    if (row.size() != columns) {
      fail(ErrorKind::io, "CSV line " + std::to_string(lineno) + ": expected " +
                              std::to_string(columns) + " columns");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fpp::csv
