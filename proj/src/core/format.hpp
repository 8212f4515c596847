#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spinbus {

/// Locale-independent rendering with 15 significant digits. Negative zero
/// prints as 0.
std::string format_number(double value);

/// The double nearest to format_number(value); used for JSON output so that
/// emitted numbers carry at most 15 significant digits.
double round_to_15(double value);
std::vector<double> round_to_15(std::span<const double> values);

/// Builds CSV text with a single header row and '\n' line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& row(std::span<const std::string> cells);
  CsvWriter& row(std::initializer_list<std::string> cells);
  const std::string& str() const noexcept { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

}  // namespace spinbus
