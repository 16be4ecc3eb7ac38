#include "qldp/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>

#include "qldp/error.hpp"

namespace qldp::kernels {

namespace {

std::size_t batch_begin(std::size_t b, std::size_t batches, std::size_t n) { return n * b / batches; }

void check_batches(std::size_t batches, std::size_t n_samples) {
  if (batches < 1) throw Error(ErrorCode::InvalidConfig, "batch_partition must be >= 1");
  if (batches > n_samples) throw Error(ErrorCode::InvalidConfig, "more batches than samples");
}

std::vector<BallAccumulator> merge_range(const std::vector<std::vector<BallAccumulator>>& batches, std::size_t lo,
                                         std::size_t hi) {
  if (hi - lo == 1) return batches[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  auto left = merge_range(batches, lo, mid);
  const auto right = merge_range(batches, mid, hi);
  for (std::size_t k = 0; k < left.size(); ++k) left[k].merge(right[k]);
  return left;
}

// Runs body(i) for i in [0, n) on `threads` workers and rethrows the first error.
template <class Body>
void parallel_for(std::size_t n, int threads, int chunk, Body body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, chunk) num_threads(threads)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(qldp_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

KingmanEstimate kingman_one(const RenewalModel& model, EnvironmentView env, std::span<const std::size_t> t_list,
                            const std::vector<double>& phi) {
  const std::size_t t_max = *std::max_element(t_list.begin(), t_list.end());
  StepLawSource source(model, env, t_max);
  return kingman_from_table(renewal_dp(source, phi, false).table, t_list);
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QLDP_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidConfig, std::string("QLDP_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1, omp_get_max_threads());
}

std::vector<BallAccumulator> merge_batches(const std::vector<std::vector<BallAccumulator>>& batches) {
  if (batches.empty()) return {};
  return merge_range(batches, 0, batches.size());
}

namespace serial {

std::vector<KingmanEstimate> kingman_sweep(const RenewalModel& model, EnvironmentView env,
                                           std::span<const std::size_t> t_list,
                                           const std::vector<std::vector<double>>& phis) {
  std::vector<KingmanEstimate> out;
  out.reserve(phis.size());
  for (const auto& phi : phis) out.push_back(kingman_one(model, env, t_list, phi));
  return out;
}

std::vector<FreeEnergyResult> variational_sweep(const RenewalModel& model,
                                                std::shared_ptr<const EnvironmentSpec> periodic_spec,
                                                const std::vector<std::vector<double>>& phis,
                                                const FreeEnergyOptions& options) {
  std::vector<FreeEnergyResult> out;
  out.reserve(phis.size());
  for (const auto& phi : phis) out.push_back(free_energy_variational(model, periodic_spec, phi, options));
  return out;
}

std::vector<LegendreValue> legendre_sweep(const CgfCurve& curve, const std::vector<std::vector<double>>& ws,
                                          const std::optional<TailConstant>& clip) {
  std::vector<LegendreValue> out;
  out.reserve(ws.size());
  for (const auto& w : ws) out.push_back(detail::legendre_prechecked(curve, w, clip));
  return out;
}

std::vector<BallAccumulator> mc_scan(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                     const std::vector<std::vector<double>>& w_grid, double delta, MeasureKind kind,
                                     std::uint64_t seed, std::size_t n_samples, std::size_t batches) {
  check_batches(batches, n_samples);
  std::vector<std::vector<BallAccumulator>> parts(batches);
  StepLawSource source(model, env, t);
  for (std::size_t b = 0; b < batches; ++b) {
    parts[b] = simulate_batch(source, w_grid, delta, kind, seed, batch_begin(b, batches, n_samples),
                              batch_begin(b + 1, batches, n_samples));
  }
  return merge_batches(parts);
}

}  // namespace serial

namespace parallel {

std::vector<KingmanEstimate> kingman_sweep(const RenewalModel& model, EnvironmentView env,
                                           std::span<const std::size_t> t_list,
                                           const std::vector<std::vector<double>>& phis, int threads) {
  std::vector<KingmanEstimate> out(phis.size());
  parallel_for(phis.size(), threads, 1, [&](std::size_t i) { out[i] = kingman_one(model, env, t_list, phis[i]); });
  return out;
}

std::vector<FreeEnergyResult> variational_sweep(const RenewalModel& model,
                                                std::shared_ptr<const EnvironmentSpec> periodic_spec,
                                                const std::vector<std::vector<double>>& phis,
                                                const FreeEnergyOptions& options, int threads) {
  std::vector<FreeEnergyResult> out(phis.size());
  parallel_for(phis.size(), threads, 1, [&](std::size_t i) {
    out[i] = free_energy_variational(model, periodic_spec, phis[i], options);
  });
  return out;
}

std::vector<LegendreValue> legendre_sweep(const CgfCurve& curve, const std::vector<std::vector<double>>& ws,
                                          const std::optional<TailConstant>& clip, int threads) {
  std::vector<LegendreValue> out(ws.size());
  parallel_for(ws.size(), threads, 16, [&](std::size_t i) { out[i] = detail::legendre_prechecked(curve, ws[i], clip); });
  return out;
}

std::vector<BallAccumulator> mc_scan(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                     const std::vector<std::vector<double>>& w_grid, double delta, MeasureKind kind,
                                     std::uint64_t seed, std::size_t n_samples, std::size_t batches, int threads) {
  check_batches(batches, n_samples);
  std::vector<std::vector<BallAccumulator>> parts(batches);
  parallel_for(batches, threads, 1, [&](std::size_t b) {
    StepLawSource source(model, env, t);
    parts[b] = simulate_batch(source, w_grid, delta, kind, seed, batch_begin(b, batches, n_samples),
                              batch_begin(b + 1, batches, n_samples));
  });
  return merge_batches(parts);
}

}  // namespace parallel

}  // namespace qldp::kernels
