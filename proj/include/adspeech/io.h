#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adspeech {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row

  // Index of a header column, or -1.
  int column(std::string_view name) const;
};

// Minimal RFC-4180 reader: comma separated, optional double-quoted fields,
// no embedded newlines. Blank lines are skipped.
CsvTable read_csv(const std::filesystem::path& path);
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_escape(std::string_view field);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace adspeech
