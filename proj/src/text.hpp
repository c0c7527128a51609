#pragma once

// Internal helpers for the flat text formats (config files, oracle metadata, CSV).

#include "speclab/common.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace speclab::text {

/// Shortest round-trip representation ("%.17g").
std::string format_double(double v);
std::string join(const std::vector<double>& values, char sep = ',');
std::string join(const Vector& values, char sep = ',');

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Strict parsers; throw ConfigError mentioning `what` on malformed input.
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);
std::vector<double> parse_doubles(std::string_view s, std::string_view what, char sep = ',');

/// key=value per line, '#' comments. Duplicate keys are an error.
std::map<std::string, std::string> parse_key_values(const std::string& content);

std::string read_file(const std::string& path);

}  // namespace speclab::text
