#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sessionkit {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// RFC 4180 style: fields with separators, quotes or newlines are quoted.
std::string csv_escape(std::string_view field);
std::vector<std::string> csv_split(std::string_view line);

// Header plus string rows; numeric columns become JSON numbers.
class Table {
 public:
  struct Column {
    std::string name;
    bool numeric = false;
  };

  explicit Table(std::vector<Column> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<std::string> row);

  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;

 private:
  std::vector<Column> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Parsed CSV file with a mandatory header row.
class CsvFile {
 public:
  static CsvFile read(const std::filesystem::path& path);
  static CsvFile parse(std::string_view text, std::string source);

  const std::string& source() const { return source_; }
  std::size_t row_count() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  // Throws InputError naming the file if the column is missing.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::int64_t line_of(std::size_t row) const { return line_numbers_[row]; }

  // Typed field access; errors name file, line and field.
  const std::string& text(std::size_t row, std::size_t col) const;
  std::int64_t integer(std::size_t row, std::size_t col) const;
  double real(std::size_t row, std::size_t col) const;
  bool boolean(std::size_t row, std::size_t col) const;

 private:
  [[noreturn]] void fail(std::size_t row, std::size_t col, std::string_view what) const;

  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::int64_t> line_numbers_;
};

// Writes text to path, creating parent directories. Throws IoFailure.
void write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace sessionkit
