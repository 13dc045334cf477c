#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ropex::csv {

/// Shortest round-trip decimal representation.
std::string number(double v);
/// number(v) or "NA".
std::string number_or_na(const std::optional<double>& v);

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Parses a full-string double; "NA" yields nullopt. Throws ConfigError otherwise.
std::optional<double> parse_number_or_na(std::string_view s);
double parse_number(std::string_view s);

}  // namespace ropex::csv
