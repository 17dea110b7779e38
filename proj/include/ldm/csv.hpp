#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace ldm {

/// Shortest round-trip decimal form; independent of the C++ locale.
std::string format_double(double v);

/// Row-oriented CSV writer. The header row is written on construction.
class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::string_view v);
  void end_row();
  /// Writes "# text" as a trailing comment line.
  void comment(std::string_view text);

private:
  std::ofstream out_;
  bool first_ = true;
};

/// Numeric CSV table. A first row that does not parse as numbers is treated
/// as a header; lines starting with '#' are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path);

}  // namespace ldm
