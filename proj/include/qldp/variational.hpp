#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qldp/env.hpp"
#include "qldp/model.hpp"

namespace qldp {

/// Dense n x n matrix of log-entries (-inf for zero), row-major.
struct LogMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
};

/// One-step Gibbs weights of a model on a periodic environment, indexed by
/// residue i and waiting time s. Independent of zeta, so a bisection over
/// zeta reuses it.
class PeriodicKernel {
 public:
  PeriodicKernel(const RenewalModel& model, std::shared_ptr<const EnvironmentSpec> periodic_spec,
                 std::span<const double> phi);

  std::size_t period() const { return n_; }
  int s_max() const { return s_max_; }
  double log_weight(std::size_t i, int s) const { return log_w_[i * s_max_ + (s - 1)]; }

  /// A[i][j] = sum_{s = j - i mod n} w_i(s) e^{-zeta s}, in logs.
  LogMatrix log_transfer(double zeta) const;
  /// Smallest finite log-weight and largest row log-mass; seeds the zeta bracket.
  std::pair<double, double> weight_range() const;

 private:
  std::size_t n_;
  int s_max_;
  std::vector<double> log_w_;
};

struct CorrectorSolution {
  std::vector<double> R;  // min component normalized to 1
  double zeta = 0.0;
  double upsilon = 0.0;
  int iterations = 0;
  double gap = 0.0;  // |upsilon - Perron value|
};

struct UpsilonOptions {
  int max_iter = 400;     // subgradient iterations
  int newton_iter = 60;   // polishing iterations on the equalization system
  double tol = 1e-12;
  double step_scale = 1.0;
};

/// G(R) = max_i [ log sum_j A_ij e^{R_j} - R_i ].
double corrector_objective(const LogMatrix& a, std::span<const double> R);

/// min_R G(R) by subgradient descent with R[0] pinned, then Newton polish.
CorrectorSolution solve_corrector(const LogMatrix& a, double zeta, const UpsilonOptions& options = {});

struct PerronValue {
  double log_radius = 0.0;
  bool reducible = false;
  int iterations = 0;
};

/// Log spectral radius by power iteration with Collatz-Wielandt bounds.
/// Reducible matrices get the maximum over their strongly connected blocks.
PerronValue perron_log_radius(const LogMatrix& a);

CorrectorSolution upsilon(const RenewalModel& model, std::shared_ptr<const EnvironmentSpec> periodic_spec,
                          std::span<const double> phi, double zeta, const UpsilonOptions& options = {});
double perron_upsilon(const RenewalModel& model, std::shared_ptr<const EnvironmentSpec> periodic_spec,
                      std::span<const double> phi, double zeta);

struct FreeEnergyOptions {
  std::optional<std::pair<double, double>> bracket;
  double tol = 1e-12;
  int max_expansions = 60;
  bool perron = false;  // evaluate Upsilon with the Perron oracle instead of the corrector solver
  UpsilonOptions upsilon;
};

struct FreeEnergyResult {
  double z = 0.0;
  bool at_lower_edge = false;
  int evaluations = 0;
};

FreeEnergyResult free_energy_variational(const RenewalModel& model,
                                         std::shared_ptr<const EnvironmentSpec> periodic_spec,
                                         std::span<const double> phi, const FreeEnergyOptions& options = {});
FreeEnergyResult free_energy_variational(const PeriodicKernel& kernel, const FreeEnergyOptions& options = {});

/// (state_index, R) rows after a header row (zeta, upsilon, gap, iterations).
void write_corrector_csv(const CorrectorSolution& solution, const std::filesystem::path& path);

}  // namespace qldp
