#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chris::text {

// Splits on `sep`; no quoting (none of the CSV schemas here carry quoted fields).
std::vector<std::string_view> split(std::string_view line, char sep = ',');

std::string_view trim(std::string_view s);

// Whole-field parses; std::nullopt on trailing garbage or overflow.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace chris::text
