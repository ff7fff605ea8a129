#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace scengen {

// Splits one CSV line on commas. Fields in this project never contain commas
// or quotes, so no quoting rules are applied.
std::vector<std::string> split_csv_line(std::string_view line);

// Reads a whole CSV file; returns rows of fields, header included.
// Throws DataError if the file cannot be opened or is empty.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

// Parses a finite double; throws DataError otherwise.
double parse_double(std::string_view field, const std::string& context);

// Fixed-point formatting with 6 decimal places, the scenario CSV convention.
std::string format_mw(double value);

}  // namespace scengen
