#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qldp/env.hpp"
#include "qldp/ldp.hpp"
#include "qldp/model.hpp"

namespace qldp::cli {

/// Axis-aligned grid: coordinate j runs min[j], min[j] + step[j], ... <= max[j].
struct GridSpec {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<double> step;

  std::size_t dim() const { return min.size(); }
  /// Cartesian product, last coordinate fastest.
  std::vector<std::vector<double>> points() const;
};

struct McSpec {
  std::size_t n_samples = 10000;
  double delta = 0.05;
  std::size_t batch_partition = 8;
  std::optional<std::size_t> t;  // defaults to max(t_list)
};

enum class RouteChoice { Kingman, Variational, Both };

struct ExperimentConfig {
  std::shared_ptr<const EnvironmentSpec> environment;
  std::optional<std::filesystem::path> trajectory_csv;
  nlohmann::json model;  // builder name plus parameters, kept raw until build_model
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  GridSpec phi_grid;
  GridSpec w_grid;
  std::vector<std::size_t> t_list;
  McSpec mc;
  std::filesystem::path output_dir = ".";
  RouteChoice route = RouteChoice::Both;
  RateKind kind = RateKind::Constrained;
  double route_tolerance = 1e-2;
  std::optional<TailConstant> ell;

  /// Throws InvalidConfig on an empty grid, non-positive step or
  /// horizon < max(t_list).
  void validate() const;
  std::size_t t_max() const;
  std::size_t mc_t() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

EnvironmentSpec parse_environment(const nlohmann::json& j);
std::unique_ptr<RenewalModel> build_model(const nlohmann::json& j, const EnvironmentSpec& env);
/// Realized environment, or the trajectory loaded from trajectory_csv.
EnvironmentTrajectory realize_environment(const ExperimentConfig& config);

RouteChoice parse_route(const std::string& s);
RateKind parse_kind(const std::string& s);

}  // namespace qldp::cli
