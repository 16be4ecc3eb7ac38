// Serial reference kernels against their OpenMP versions on the same inputs.
#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "qldp/example_models.hpp"
#include "qldp/kernels.hpp"

using namespace qldp;

namespace {

struct Fixture {
  std::shared_ptr<const EnvironmentSpec> spec;
  EnvironmentTrajectory traj;
  std::unique_ptr<RenewalModel> model;
  std::vector<std::vector<double>> phis;
  std::vector<std::vector<double>> ws;
  CgfCurve curve;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    auto spec = std::make_shared<const EnvironmentSpec>(EnvironmentSpec::periodic(
        {"omega"}, {{"a", {1.0}}, {"b", {-0.5}}, {"c", {0.2}}, {"d", {-1.0}}, {"e", {0.4}}}));
    examples::PinningSpec ps;
    ps.alpha = 0.6;
    ps.h = 0.2;
    ps.beta = 0.4;
    ps.s_max = 200;
    ps.truncation_cap = 1.0;
    Fixture out{spec, realize(spec, 0, 4000), std::make_unique<examples::PinningModel>(ps), {}, {}, {}};
    for (int k = 0; k <= 64; ++k) out.phis.push_back({-2.0 + k * 4.0 / 64});
    for (int k = 0; k <= 200; ++k) out.ws.push_back({0.005 * k});
    const auto zs = kernels::serial::variational_sweep(*out.model, spec, out.phis, {});
    for (std::size_t k = 0; k < zs.size(); ++k) out.curve.points.push_back({out.phis[k], zs[k].z, CgfSource::Variational});
    return out;
  }();
  return f;
}

const std::size_t kT[3] = {1000, 2000, 4000};

void BM_kingman_serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::kingman_sweep(*f.model, f.traj.view(), kT, f.phis));
}
void BM_kingman_parallel(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        kernels::parallel::kingman_sweep(*f.model, f.traj.view(), kT, f.phis, static_cast<int>(st.range(0))));
  }
}

void BM_variational_serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::variational_sweep(*f.model, f.spec, f.phis, {}));
}
void BM_variational_parallel(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        kernels::parallel::variational_sweep(*f.model, f.spec, f.phis, {}, static_cast<int>(st.range(0))));
  }
}

void BM_legendre_serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::legendre_sweep(f.curve, f.ws, std::nullopt));
}
void BM_legendre_parallel(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        kernels::parallel::legendre_sweep(f.curve, f.ws, std::nullopt, static_cast<int>(st.range(0))));
  }
}

void BM_mc_serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        kernels::serial::mc_scan(*f.model, f.traj.view(), 500, f.ws, 0.02, MeasureKind::Free, 1, 4000, 16));
  }
}
void BM_mc_parallel(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) {
    benchmark::DoNotOptimize(kernels::parallel::mc_scan(*f.model, f.traj.view(), 500, f.ws, 0.02, MeasureKind::Free, 1,
                                                        4000, 16, static_cast<int>(st.range(0))));
  }
}

}  // namespace

BENCHMARK(BM_kingman_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_kingman_parallel)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_variational_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_variational_parallel)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_legendre_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_legendre_parallel)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_mc_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mc_parallel)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
