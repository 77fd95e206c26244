#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fpp::csv {

/// Decimal with 17 significant digits, so doubles round-trip exactly.
std::string format(double x);

/// Parses a numeric CSV table with the given header line. Blank lines and
/// lines starting with '#' are skipped; any other mismatch throws
/// ErrorKind::io.
std::vector<std::vector<double>> read_table(std::istream& in, std::string_view header);

void write_row(std::ostream& out, const std::vector<double>& values);

}  // namespace fpp::csv
