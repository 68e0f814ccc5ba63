#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace astrodf::csv {

/// Shortest round-trip form is not used; every double is written with 17
/// significant digits so the text is a pure function of the value.
std::string format_double(double value);
double parse_double(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

std::string join_coords(std::span<const double> coords);
std::vector<double> split_coords(std::string_view text);

/// Quotes a field only when it contains a separator, quote or newline.
std::string escape(std::string_view field);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws std::out_of_range when absent.
  std::size_t column(std::string_view name) const;
};

void write_row(std::ostream& out, std::span<const std::string> fields);
Table read_table(std::istream& in);

}  // namespace astrodf::csv
