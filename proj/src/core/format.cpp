#include "core/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

#include "core/errors.hpp"

namespace spinbus {

std::string format_number(double value) {
  if (value == 0.0) return "0";
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 15);
  return std::string(buf, res.ptr);
}

double round_to_15(double value) {
  if (!std::isfinite(value) || value == 0.0) return value == 0.0 ? 0.0 : value;
  const std::string s = format_number(value);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

std::vector<double> round_to_15(std::span<const double> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(round_to_15(v));
  return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  row(header);
}

CsvWriter& CsvWriter::row(std::span<const std::string> cells) {
  if (cells.size() != columns_) throw ParameterError("CSV row has the wrong number of columns");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  return *this;
}

CsvWriter& CsvWriter::row(std::initializer_list<std::string> cells) {
  return row(std::span<const std::string>(cells.begin(), cells.size()));
}

}  // namespace spinbus
