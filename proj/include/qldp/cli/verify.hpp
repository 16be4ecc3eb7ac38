#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qldp::cli {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string measured;
  std::string expected;
  double seconds = 0.0;
  std::optional<double> time_limit;  // seconds; exceeding it fails the criterion
};

struct VerifyOptions {
  bool inject_broken_dp = false;  // test fixture: perturbs the DP so criterion 1 must fail
  std::filesystem::path scratch_dir = std::filesystem::temp_directory_path() / "qldp_verify";
};

constexpr int kCriteria = 10;

CriterionResult run_criterion(int id, const VerifyOptions& options = {});
std::string format_result(const CriterionResult& r);

/// Runs the given criteria (all when empty), prints one line each, returns
/// 0 iff all pass.
int cmd_verify(const std::vector<int>& ids, const VerifyOptions& options, std::ostream& out);

}  // namespace qldp::cli
