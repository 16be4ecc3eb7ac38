#pragma once

// Grid sweeps behind the CGF, rate and simulation drivers. Each sweep has a
// serial reference and an OpenMP version; both return identical results
// (grid points are independent, Monte Carlo batches are merged in batch
// order), which the tests and the benchmarks rely on.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qldp/ldp.hpp"
#include "qldp/montecarlo.hpp"
#include "qldp/partition.hpp"
#include "qldp/variational.hpp"

namespace qldp::kernels {

/// requested > 0 wins; otherwise QLDP_THREADS, otherwise the OpenMP default.
int resolve_threads(int requested = 0);

/// Pairwise merge of per-batch accumulators in batch order.
std::vector<BallAccumulator> merge_batches(const std::vector<std::vector<BallAccumulator>>& batches);

namespace serial {

std::vector<KingmanEstimate> kingman_sweep(const RenewalModel& model, EnvironmentView env,
                                           std::span<const std::size_t> t_list,
                                           const std::vector<std::vector<double>>& phis);
std::vector<FreeEnergyResult> variational_sweep(const RenewalModel& model,
                                                std::shared_ptr<const EnvironmentSpec> periodic_spec,
                                                const std::vector<std::vector<double>>& phis,
                                                const FreeEnergyOptions& options);
std::vector<LegendreValue> legendre_sweep(const CgfCurve& curve, const std::vector<std::vector<double>>& ws,
                                          const std::optional<TailConstant>& clip);
std::vector<BallAccumulator> mc_scan(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                     const std::vector<std::vector<double>>& w_grid, double delta, MeasureKind kind,
                                     std::uint64_t seed, std::size_t n_samples, std::size_t batches);

}  // namespace serial

namespace parallel {

std::vector<KingmanEstimate> kingman_sweep(const RenewalModel& model, EnvironmentView env,
                                           std::span<const std::size_t> t_list,
                                           const std::vector<std::vector<double>>& phis, int threads);
std::vector<FreeEnergyResult> variational_sweep(const RenewalModel& model,
                                                std::shared_ptr<const EnvironmentSpec> periodic_spec,
                                                const std::vector<std::vector<double>>& phis,
                                                const FreeEnergyOptions& options, int threads);
std::vector<LegendreValue> legendre_sweep(const CgfCurve& curve, const std::vector<std::vector<double>>& ws,
                                          const std::optional<TailConstant>& clip, int threads);
std::vector<BallAccumulator> mc_scan(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                     const std::vector<std::vector<double>>& w_grid, double delta, MeasureKind kind,
                                     std::uint64_t seed, std::size_t n_samples, std::size_t batches, int threads);

}  // namespace parallel

}  // namespace qldp::kernels
