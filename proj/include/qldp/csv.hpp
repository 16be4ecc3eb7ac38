#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace qldp {

/// Minimal CSV writer with a fixed, locale-independent number format
/// ("%.17g"), so identical values always produce identical bytes.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void header(const std::vector<std::string>& columns);
  void row_begin();
  void field(double value);
  void field(long long value);
  void field(std::string_view value);
  void row_end();

 private:
  void separator();

  std::ofstream out_;
  bool first_ = true;
};

std::string format_double(double value);

}  // namespace qldp
