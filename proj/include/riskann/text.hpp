#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace riskann::text {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Parses a whole field as a double. False on junk or trailing characters.
bool parse_double(std::string_view field, double& out) noexcept;

bool parse_int(std::string_view field, long long& out) noexcept;

/// Splits one CSV line on commas. Fields are never quoted in our formats.
std::vector<std::string> split_csv_line(std::string_view line);

std::string join(const std::vector<std::string>& items, std::string_view separator);

std::string read_file(const std::string& path);

/// Writes through a temporary file so a failed run never leaves a partial
/// output behind.
void write_file(const std::string& path, std::string_view content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Reads a headed CSV file, skipping blank lines and stripping CR.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::string_view content, const std::string& source);

}  // namespace riskann::text
