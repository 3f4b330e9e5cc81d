#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hdm::cli {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  explicit Table(std::vector<std::string> names);
  void add(std::vector<Cell> row);
};

/// 17 significant digits, classic locale.
std::string format_number(double value);
std::string format_cell(const Cell& cell);

std::string render_csv(const Table& table);
std::string render_json(const Table& table);

/// Inverse of render_csv: integers, then doubles, then strings.
Table parse_csv(std::string_view text);

/// Writes the table as "csv" or "json".
void write_table(const Table& table, const std::filesystem::path& path, std::string_view format);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace hdm::cli
