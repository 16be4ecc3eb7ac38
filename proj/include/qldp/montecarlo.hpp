#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qldp/env.hpp"
#include "qldp/logspace.hpp"
#include "qldp/model.hpp"

namespace qldp {

class StepLawSource;
class CounterRng;

/// One simulated renewal-reward path on [0, t].
struct RenewalPath {
  std::size_t t = 0;
  std::vector<int> waits;                   // S_1..S_N
  std::vector<std::size_t> renewal_times;   // T_0 = 0, ..., T_N
  std::vector<double> rewards;              // X_1..X_N, flat N x d
  std::vector<double> W;                    // W_t
  std::size_t n_renewals = 0;               // N_t
  double H = 0.0;                           // Hamiltonian
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  /// The wait after T_N left [0, t] (or never ended); it is only known to
  /// exceed t - T_N, so it is not stored.
  bool censored = false;

  bool ends_at_t() const { return renewal_times.back() == t; }
};

/// Samples S_i from p at f^{T_{i-1}} omega and X_i from lambda(.|S_i) until
/// the next renewal would pass t. Stream `stream` of `seed` supplies the draws.
RenewalPath simulate_trajectory(const RenewalModel& model, EnvironmentView env, std::size_t t, std::uint64_t seed,
                                std::uint64_t stream = 0);

enum class MeasureKind { Constrained, Free };

struct BallMassEstimate {
  double log_mass_per_t = kNegInf;
  double std_error = 0.0;  // delta-method standard error of log_mass_per_t
  std::size_t hits = 0;
  std::size_t n_samples = 0;
};

/// Per-w running sums of the Gibbs weights e^H 1{ball} (in logs).
struct BallAccumulator {
  LogSumAccumulator sum;
  LogSumAccumulator sum_sq;
  std::size_t hits = 0;
  std::size_t n = 0;

  void merge(const BallAccumulator& other);
  BallMassEstimate estimate(std::size_t t) const;
};

/// Simulates samples [first, last) (sample i uses stream i) and scores each
/// path against every ball center in w_grid.
std::vector<BallAccumulator> simulate_batch(StepLawSource& source, std::span<const std::vector<double>> w_grid,
                                            double delta, MeasureKind kind, std::uint64_t seed, std::size_t first,
                                            std::size_t last);

struct McOptions {
  std::size_t batches = 1;  // declared batch partition; fixes the summation order
  int threads = 0;          // 0: QLDP_THREADS or the OpenMP default
};

BallMassEstimate empirical_ball_mass(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                     std::span<const double> w, double delta, std::size_t n_samples,
                                     std::uint64_t seed, MeasureKind kind, const McOptions& options = {});

struct ScanRow {
  std::vector<double> w;
  BallMassEstimate estimate;
};

/// One estimate per w from a shared set of simulated paths.
std::vector<ScanRow> empirical_rate_scan(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                         const std::vector<std::vector<double>>& w_grid, double delta,
                                         std::size_t n_samples, std::uint64_t seed, MeasureKind kind,
                                         const McOptions& options = {});

/// Columns (w..., log_mass_per_t, std_error, hits, n_samples, t, seed).
void write_scan_csv(const std::vector<ScanRow>& rows, std::size_t t, std::uint64_t seed,
                    const std::filesystem::path& path);

}  // namespace qldp
