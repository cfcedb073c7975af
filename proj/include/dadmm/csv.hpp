#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dadmm::csv {

// Shortest round-trip decimal representation; "nan"/"inf" for non-finite.
std::string number(double value);

// Empty string for an absent value.
std::string number(const std::optional<double>& value);

std::vector<std::string> split(std::string_view line);

double parse_number(std::string_view field);

// Joins fields with commas; fields never contain commas or quotes here.
std::string join(const std::vector<std::string>& fields);

}  // namespace dadmm::csv
