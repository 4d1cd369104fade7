#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace meshroute::text {

std::vector<std::string> split(std::string_view line, char sep);

std::string trim(std::string_view s);

/// Strict numeric parsing; throws ValidationError naming `what` on failure.
double parse_double(std::string_view s, std::string_view what);
std::int64_t parse_int(std::string_view s, std::string_view what);

/// printf("%.*f") without locale dependence.
std::string fixed(double value, int decimals);

/// Shortest decimal text that parses back to the identical double.
std::string exact(double value);

std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes to `<path>.tmp` and renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace meshroute::text
