#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scholarperf {

/// A parsed delimited-text table: one header row followed by data rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based source line of each data row, for error messages.
    std::vector<std::size_t> line_numbers;

    std::optional<std::size_t> column(std::string_view name) const;
    std::size_t require_column(std::string_view name) const;
};

/// RFC 4180-style reader: quoted fields, doubled quotes, CRLF tolerated.
/// Blank lines are skipped. An empty stream yields an empty header.
CsvTable read_csv(std::istream& in, char delimiter = ',');

std::string csv_escape(std::string_view field, char delimiter = ',');
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

/// Shortest text that parses back to exactly `value`.
std::string format_exact(double value);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char separator);
std::string to_lower(std::string_view text);

double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

}  // namespace scholarperf
