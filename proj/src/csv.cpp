#include "ropex/csv.hpp"

#include "ropex/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <string>

namespace ropex::csv {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string number_or_na(const std::optional<double>& v) { return v ? number(*v) : "NA"; }

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number_or_na(std::string_view s) {
  s = trim(s);
  if (s == "NA") return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

double parse_number(std::string_view s) {
  const auto v = parse_number_or_na(s);
  if (!v) throw ConfigError("expected a number, got NA");
  return *v;
}

}  // namespace ropex::csv
