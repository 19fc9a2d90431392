#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hetsurr {

// Shortest decimal text that parses back to the identical double.
std::string format_number(double value);

// Like format_number, but NaN is written as "NA".
std::string format_optional(double value);

// Parses a complete field as a double. Rejects trailing garbage; accepts a
// leading '+'. Returns nullopt for anything that is not a finite number.
std::optional<double> parse_number(std::string_view field);

// Splits one line on commas. Numeric fields are never quoted, so no quote
// handling is attempted.
std::vector<std::string_view> split_fields(std::string_view line);

std::string_view trim(std::string_view text);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace hetsurr
