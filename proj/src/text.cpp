#include "riskann/text.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "riskann/error.hpp"

namespace riskann::text {

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

bool parse_double(std::string_view field, double& out) noexcept {
  if (field.empty()) {
    return false;
  }
  if (field.front() == '+') {
    field.remove_prefix(1);
  }
  const auto result = std::from_chars(field.data(), field.data() + field.size(), out);
  return result.ec == std::errc() && result.ptr == field.data() + field.size();
}

bool parse_int(std::string_view field, long long& out) noexcept {
  if (field.empty()) {
    return false;
  }
  const auto result = std::from_chars(field.data(), field.data() + field.size(), out);
  return result.ec == std::errc() && result.ptr == field.data() + field.size();
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) {
      f.pop_back();
    }
    const auto first = f.find_first_not_of(" \t");
    f.erase(0, first == std::string::npos ? f.size() : first);
  }
  return fields;
}

std::string join(const std::vector<std::string>& items, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) {
      out += separator;
    }
    out += items[i];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open '" + path + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw IoError("failed writing '" + path + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot replace '" + path + "'");
  }
}

CsvTable parse_csv(std::string_view content, const std::string& source) {
  CsvTable table;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) {
      end = content.size();
    }
    std::string_view line = content.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == content.size()) {
        break;
      }
      continue;
    }
    if (!have_header) {
      table.header = split_csv_line(line);
      have_header = true;
    } else {
      table.rows.push_back(split_csv_line(line));
      table.line_numbers.push_back(line_no);
    }
    if (end == content.size()) {
      break;
    }
  }
  if (!have_header) {
    throw SchemaError("'" + source + "' has no header row");
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  return parse_csv(read_file(path), path);
}

}  // namespace riskann::text
