#include "qldp/csv.hpp"

#include <cmath>
#include <cstdio>

#include "qldp/error.hpp"

namespace qldp {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
  if (!out_) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  row_begin();
  for (const auto& c : columns) field(std::string_view(c));
  row_end();
}

void CsvWriter::row_begin() { first_ = true; }

void CsvWriter::separator() {
  if (!first_) out_ << ',';
  first_ = false;
}

void CsvWriter::field(double value) {
  separator();
  out_ << format_double(value);
}

void CsvWriter::field(long long value) {
  separator();
  out_ << value;
}

void CsvWriter::field(std::string_view value) {
  separator();
  out_ << value;
}

void CsvWriter::row_end() { out_ << '\n'; }

}  // namespace qldp
