#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace gpev {

/// Shortest decimal text that reads back to the identical double.
std::string format_double(double v);
/// Strict parse of a whole cell; returns false on any trailing garbage.
bool parse_double(std::string_view text, double& out);

std::vector<std::string> split_csv_line(std::string_view line);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& cell(double v);
  CsvWriter& cell(std::string_view v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  void end_row();

  /// Flushes and, in debug builds, re-reads the file and checks it against the header.
  void close();

 private:
  void separator();

  std::filesystem::path path_;
  std::vector<std::string> header_;
  std::ofstream out_;
  std::size_t column_ = 0;
  bool closed_ = false;
};

/// Reads a CSV file: header plus rows of string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// -1 when missing.
  int column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Throws std::runtime_error when the header differs or a row has the wrong width.
void validate_csv_schema(const std::filesystem::path& path, const std::vector<std::string>& expected);

}  // namespace gpev
