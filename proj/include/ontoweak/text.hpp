#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ontoweak {

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace ontoweak
