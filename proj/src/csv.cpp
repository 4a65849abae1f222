#include "gpev/csv.hpp"

#include <array>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace gpev {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> cells;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  cells.push_back(std::move(current));
  return cells;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), header_(std::move(header)), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out_ << ',';
    out_ << header_[i];
  }
  out_ << '\n';
}

CsvWriter::~CsvWriter() {
  if (!closed_) out_.flush();
}

void CsvWriter::separator() {
  if (column_ >= header_.size()) {
    throw std::logic_error("CsvWriter: too many cells for " + path_.string());
  }
  if (column_) out_ << ',';
  ++column_;
}

CsvWriter& CsvWriter::cell(double v) {
  separator();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
  separator();
  if (v.find_first_of(",\"\n") != std::string_view::npos) {
    out_ << '"';
    for (char c : v) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  } else {
    out_ << v;
  }
  return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
  separator();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  if (column_ != header_.size()) {
    throw std::logic_error("CsvWriter: short row in " + path_.string());
  }
  out_ << '\n';
  column_ = 0;
}

void CsvWriter::close() {
  if (closed_) return;
  out_.close();
  closed_ = true;
  if (!out_) throw std::runtime_error("write failed for " + path_.string());
#ifndef NDEBUG
  validate_csv_schema(path_, header_);
#endif
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      // Tolerate a UTF-8 byte-order mark.
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      table.header = split_csv_line(line);
      first = false;
      continue;
    }
    if (line.empty() || line == "\r") continue;
    table.rows.push_back(split_csv_line(line));
  }
  if (first) throw std::runtime_error(path.string() + ": empty file");
  return table;
}

void validate_csv_schema(const std::filesystem::path& path, const std::vector<std::string>& expected) {
  const CsvTable table = read_csv(path);
  if (table.header != expected) {
    throw std::runtime_error(path.string() + ": header does not match the documented schema");
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != expected.size()) {
      std::ostringstream msg;
      msg << path.string() << ": row " << r + 1 << " has " << table.rows[r].size() << " cells, expected "
          << expected.size();
      throw std::runtime_error(msg.str());
    }
  }
}

}  // namespace gpev
