#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apneakit {

// Shortest decimal representation that round-trips the double. Used for all
// persisted numbers so that rewriting a loaded file is byte-identical.
std::string fmt_shortest(double value);

// Fixed-point with `precision` digits after the decimal point.
std::string fmt_fixed(double value, int precision);

// Strict double parse of the whole (trimmed) token.
std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view line, char sep);

}  // namespace apneakit
