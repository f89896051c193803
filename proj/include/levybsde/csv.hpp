#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace levybsde {

/// Shortest-round-trip-safe decimal: printf "%.17g".
std::string format_double(double value);

/// Comma-separated rows, LF line endings, no quoting (all fields numeric or
/// plain identifiers).
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& columns);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(unsigned long long value);
  CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
  CsvWriter& field(std::size_t value) { return field(static_cast<unsigned long long>(value)); }
  CsvWriter& field(std::string_view text);
  void end_row();

 private:
  void separator();
  std::ostream& out_;
  bool row_open_ = false;
};

/// Splits one CSV line on commas.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace levybsde
