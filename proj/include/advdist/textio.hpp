#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace advdist::textio {

/// Shortest decimal that parses back to the identical double. "nan", "inf",
/// "-inf" for non-finite values.
[[nodiscard]] std::string format_double(double value);

/// Strict parse of a whole token (surrounding spaces allowed). Accepts the
/// non-finite spellings written by format_double.
[[nodiscard]] std::optional<double> parse_double(std::string_view token);

[[nodiscard]] std::optional<long long> parse_int(std::string_view token);

[[nodiscard]] std::vector<std::string> split(std::string_view line, char sep);

[[nodiscard]] std::string_view trim(std::string_view text);

/// Reads an entire file; throws MissingFile when it cannot be opened.
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

/// Writes atomically enough for our purposes (truncate + write); throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Splits on '\n', dropping a trailing '\r' per line and a final empty line.
[[nodiscard]] std::vector<std::string> lines(std::string_view text);

}  // namespace advdist::textio
