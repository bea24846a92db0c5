#include "sessionkit/table.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sessionkit/error.hpp"

namespace sessionkit {

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf, end);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns_.size()) throw InvalidSpec("row width does not match header");
  rows_.push_back(std::move(row));
}

void Table::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (c) out << ',';
    out << csv_escape(columns_[c].name);
  }
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << csv_escape(row[c]);
    }
    out << '\n';
  }
}

void Table::write_json(std::ostream& out) const {
  nlohmann::ordered_json array = nlohmann::ordered_json::array();
  for (const auto& row : rows_) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string& v = row[c];
      if (!columns_[c].numeric) {
        obj[columns_[c].name] = v;
        continue;
      }
      std::int64_t i = 0;
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
      if (ec == std::errc{} && p == v.data() + v.size()) {
        obj[columns_[c].name] = i;
      } else {
        double d = 0;
        const auto [q, ec2] = std::from_chars(v.data(), v.data() + v.size(), d);
        if (ec2 == std::errc{} && q == v.data() + v.size()) {
          obj[columns_[c].name] = d;
        } else {
          obj[columns_[c].name] = v;
        }
      }
    }
    array.push_back(std::move(obj));
  }
  out << array.dump(2) << '\n';
}

CsvFile CsvFile::read(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

CsvFile CsvFile::parse(std::string_view text, std::string source) {
  CsvFile f;
  f.source_ = std::move(source);
  std::size_t pos = 0;
  std::int64_t line_no = 0;
  bool have_header = false;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = csv_split(line);
    if (!have_header) {
      f.header_ = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != f.header_.size()) {
      throw InputError(f.source_ + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(f.header_.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    f.rows_.push_back(std::move(fields));
    f.line_numbers_.push_back(line_no);
  }
  if (!have_header) throw InputError(f.source_ + ": missing header row");
  return f;
}

bool CsvFile::has_column(std::string_view name) const {
  for (const auto& h : header_) {
    if (h == name) return true;
  }
  return false;
}

std::size_t CsvFile::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw InputError(source_ + ":1: missing column '" + std::string(name) + "'");
}

void CsvFile::fail(std::size_t row, std::size_t col, std::string_view what) const {
  throw InputError(source_ + ":" + std::to_string(line_numbers_[row]) + ": field '" +
                   header_[col] + "': " + std::string(what) + " '" + rows_[row][col] + "'");
}

const std::string& CsvFile::text(std::size_t row, std::size_t col) const { return rows_[row][col]; }

std::int64_t CsvFile::integer(std::size_t row, std::size_t col) const {
  const std::string& v = rows_[row][col];
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) fail(row, col, "not an integer");
  return out;
}

double CsvFile::real(std::size_t row, std::size_t col) const {
  const std::string& v = rows_[row][col];
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) fail(row, col, "not a number");
  return out;
}

bool CsvFile::boolean(std::size_t row, std::size_t col) const {
  const std::string& v = rows_[row][col];
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  fail(row, col, "not a boolean");
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoFailure("cannot create '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoFailure("cannot write '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace sessionkit
