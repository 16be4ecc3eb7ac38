#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "qldp/env.hpp"
#include "qldp/model.hpp"

namespace qldp {

/// Hands out step laws along a trajectory. For periodic environments the
/// laws are computed once per residue class on a private periodic
/// extension; otherwise they are computed on demand. Laws returned by at(u)
/// resolve at least s = 1..min(s_max, t - u) and the tail at t - u.
/// Not thread-safe; give every worker its own source.
class StepLawSource {
 public:
  StepLawSource(const RenewalModel& model, EnvironmentView env, std::size_t t);

  const StepLaw& at(std::size_t u);
  /// Law of residue class r (valid only when cached()).
  const StepLaw& residue_law(std::size_t r) const { return by_residue_[r]; }
  bool cached() const { return !by_residue_.empty(); }
  std::size_t period() const { return period_; }
  /// Residue class of view position u (valid only when cached()).
  std::size_t residue(std::size_t u) const { return (env_.offset() + u) % period_; }
  const RenewalModel& model() const { return model_; }
  EnvironmentView env() const { return env_; }
  std::size_t t() const { return t_; }

 private:
  const RenewalModel& model_;
  EnvironmentView env_;
  std::size_t t_;
  std::size_t period_ = 0;
  std::optional<EnvironmentTrajectory> extended_;
  std::vector<StepLaw> by_residue_;
  StepLaw scratch_;
};

/// log Z_{omega,tau}(phi) for tau = 0..t.
struct PartitionTable {
  std::vector<double> log_values;
  std::vector<double> phi;

  std::size_t t() const { return log_values.size() - 1; }
  double log_z(std::size_t tau) const { return log_values[tau]; }
};

/// Constrained partition functions and (optionally) the log free partition
/// function from one forward pass of the renewal equation.
struct RenewalDp {
  PartitionTable table;
  std::optional<double> log_free;
};

RenewalDp renewal_dp(StepLawSource& source, std::span<const double> phi, bool want_free);

PartitionTable constrained_partition(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                     std::span<const double> phi);
/// log sum_{tau<=t} Z_{omega,tau}(phi) P_{f^tau omega}[S1 > t - tau].
double free_partition(const RenewalModel& model, EnvironmentView env, std::size_t t, std::span<const double> phi);

/// Test oracle: enumerates every renewal configuration (and, for the free
/// variant, the final overshoot weighted by its tail) in linear space.
/// Throws TooLarge beyond t = 14 or when the enumeration would exceed
/// `max_nodes` leaves.
double brute_force_partition(const RenewalModel& model, EnvironmentView env, std::size_t t,
                             std::span<const double> phi, bool constrained, double max_nodes = 5e7);

/// Unnormalized law of W_t on the lattice grid_step * Z^d. Masses are stored
/// as logs keyed by lattice index.
struct LatticeMeasure {
  std::vector<double> grid_step;
  std::size_t t = 0;
  std::map<std::vector<long long>, double> log_mass;

  double mass(const std::vector<long long>& index) const;
  double log_total() const;
  /// log of the mass of {W_t / t in the open ball B(w, delta)} (Euclidean).
  double log_ball_mass(std::span<const double> w, double delta) const;
  /// log sum_atoms mass * exp(phi . W).
  double log_moment(std::span<const double> phi) const;
};

struct LatticeOptions {
  std::size_t max_entries = 20'000'000;
};

LatticeMeasure constrained_measure(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                   std::span<const double> grid_step, const LatticeOptions& options = {});
LatticeMeasure free_measure(const RenewalModel& model, EnvironmentView env, std::size_t t,
                            std::span<const double> grid_step, const LatticeOptions& options = {});

struct KingmanEstimate {
  std::vector<std::size_t> t_list;
  std::vector<double> values;  // (1/t) log Z_{omega,t}(phi)
  double estimate = 0.0;
  double spread = 0.0;  // max - min over the last three finite values
};

KingmanEstimate kingman_cgf_estimate(const RenewalModel& model, EnvironmentView env, std::span<const double> phi,
                                     std::span<const std::size_t> t_list);
/// Same estimate from an already computed table (t_list entries <= table.t()).
KingmanEstimate kingman_from_table(const PartitionTable& table, std::span<const std::size_t> t_list);

/// {t, 2t, 4t} capped by the horizon.
std::vector<std::size_t> default_t_list(std::size_t t, std::size_t horizon);

void write_partition_csv(const PartitionTable& table, const std::filesystem::path& path);
void write_measure_csv(const LatticeMeasure& measure, const std::filesystem::path& path);

}  // namespace qldp
