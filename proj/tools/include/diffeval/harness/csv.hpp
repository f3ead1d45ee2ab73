#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace diffeval::harness {

/// 17 significant digits as with "%.17g", independent of the locale.
std::string format_double(double v);

/// Comma-separated writer with a fixed header. Cells are written in the order
/// given; the caller keeps the column order stable.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  CsvWriter& cell(double v);
  CsvWriter& cell(std::int64_t v);
  CsvWriter& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
  CsvWriter& cell(std::uint64_t v);
  CsvWriter& cell(std::string_view v);
  CsvWriter& cell(const char* v) { return cell(std::string_view(v)); }
  CsvWriter& cell(const std::string& v) { return cell(std::string_view(v)); }
  CsvWriter& cell(bool v) { return cell(static_cast<std::int64_t>(v ? 1 : 0)); }
  /// Ends the row; throws if the cell count differs from the header.
  void end_row();

  const std::filesystem::path& path() const { return path_; }

 private:
  void separator();

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t current_ = 0;
};

/// Parsed CSV: header plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace diffeval::harness
