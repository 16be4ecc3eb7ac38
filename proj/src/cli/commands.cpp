#include "qldp/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "qldp/csv.hpp"
#include "qldp/kernels.hpp"
#include "qldp/montecarlo.hpp"

namespace qldp::cli {

namespace {

void check_grid_dim(const GridSpec& grid, const RenewalModel& model, const char* name) {
  if (grid.dim() != static_cast<std::size_t>(model.dim())) {
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has dimension " + std::to_string(grid.dim()) +
                                                  ", model rewards have " + std::to_string(model.dim()));
  }
}

std::filesystem::path prepare_out(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_dir);
  return config.output_dir;
}

bool periodic(const ExperimentConfig& config) { return config.environment->kind == EnvKind::Periodic; }

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidConfig:
    case ErrorCode::OutOfHorizon:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::OffLattice:
    case ErrorCode::NotPeriodic:
    case ErrorCode::InvalidRho:
      return kInvalidInput;
    case ErrorCode::TooLarge:
    case ErrorCode::MemoryCap:
    case ErrorCode::CapExceeded:
    case ErrorCode::TooManyStates:
      return kResourceCap;
    case ErrorCode::AllMinusInfinity:
    case ErrorCode::Diverged:
    case ErrorCode::BracketFailure:
    case ErrorCode::NonConvexCurve:
    case ErrorCode::InvalidCurve:
      return kNumerical;
  }
  return kNumerical;
}

int cmd_cgf(const ExperimentConfig& config, std::ostream& log) {
  if (config.route == RouteChoice::Variational && !periodic(config)) {
    throw Error(ErrorCode::NotPeriodic, "route=variational needs a periodic environment");
  }
  const auto traj = realize_environment(config);
  const auto model = build_model(config.model, *config.environment);
  check_grid_dim(config.phi_grid, *model, "phi_grid");
  const auto phis = config.phi_grid.points();
  const int threads = kernels::resolve_threads();

  const bool want_k = config.route != RouteChoice::Variational;
  const bool want_v = config.route != RouteChoice::Kingman && periodic(config);
  std::vector<KingmanEstimate> king;
  std::vector<FreeEnergyResult> var;
  if (want_k) king = kernels::parallel::kingman_sweep(*model, traj.view(), config.t_list, phis, threads);
  if (want_v) var = kernels::parallel::variational_sweep(*model, config.environment, phis, {}, threads);

  CgfCurve curve;
  curve.dim = model->dim();
  for (std::size_t k = 0; k < phis.size(); ++k) {
    if (want_k) curve.points.push_back({phis[k], king[k].estimate, CgfSource::Kingman});
    if (want_v) curve.points.push_back({phis[k], var[k].z, CgfSource::Variational});
  }
  const auto out = prepare_out(config);
  write_cgf_csv(curve, out / "cgf.csv");
  log << "wrote " << (out / "cgf.csv").string() << " (" << phis.size() << " phi points)\n";
  if (!(want_k && want_v)) return kOk;

  CsvWriter csv(out / "cgf_routes.csv");
  std::vector<std::string> header;
  for (int j = 0; j < model->dim(); ++j) header.push_back("phi_" + std::to_string(j + 1));
  header.insert(header.end(), {"z_kingman", "kingman_spread", "z_variational", "gap"});
  csv.header(header);
  double worst = 0.0;
  for (std::size_t k = 0; k < phis.size(); ++k) {
    const double gap = std::abs(king[k].estimate - var[k].z);
    worst = std::max(worst, std::isnan(gap) ? INFINITY : gap);
    csv.row_begin();
    for (double x : phis[k]) csv.field(x);
    csv.field(king[k].estimate);
    csv.field(king[k].spread);
    csv.field(var[k].z);
    csv.field(gap);
    csv.row_end();
  }
  log << "max route gap " << format_double(worst) << " (tolerance " << config.route_tolerance << ")\n";
  if (worst > config.route_tolerance) {
    log << "route disagreement beyond tolerance\n";
    return kNumerical;
  }
  return kOk;
}

int cmd_rate(const ExperimentConfig& config, std::ostream& log) {
  Route route = Route::Kingman;
  if (config.route == RouteChoice::Variational) {
    if (!periodic(config)) throw Error(ErrorCode::NotPeriodic, "route=variational needs a periodic environment");
    route = Route::Variational;
  } else if (config.route == RouteChoice::Both && periodic(config)) {
    route = Route::Variational;
  }
  const auto traj = realize_environment(config);
  const auto model = build_model(config.model, *config.environment);
  check_grid_dim(config.phi_grid, *model, "phi_grid");
  check_grid_dim(config.w_grid, *model, "w_grid");
  RateOptions opts;
  opts.t = config.t_max();
  opts.ell = config.ell;
  const auto curve = rate_curve(*model, traj, config.phi_grid.points(), config.w_grid.points(), config.kind, route, opts);
  const auto out = prepare_out(config);
  write_rate_csv(curve, out / "rate.csv");
  log << "wrote " << (out / "rate.csv").string() << " (normalization " << format_double(curve.normalization)
      << ", route " << (route == Route::Variational ? "variational" : "kingman") << ")\n";
  return kOk;
}

int cmd_simulate(const ExperimentConfig& config, std::ostream& log) {
  const auto traj = realize_environment(config);
  const auto model = build_model(config.model, *config.environment);
  check_grid_dim(config.w_grid, *model, "w_grid");
  const auto kind = config.kind == RateKind::Free ? MeasureKind::Free : MeasureKind::Constrained;
  McOptions opts;
  opts.batches = config.mc.batch_partition;
  const std::size_t t = config.mc_t();
  const auto rows = empirical_rate_scan(*model, traj.view(), t, config.w_grid.points(), config.mc.delta,
                                        config.mc.n_samples, config.seed, kind, opts);
  const auto out = prepare_out(config);
  write_scan_csv(rows, t, config.seed, out / "scan.csv");
  std::size_t empty = 0;
  for (const auto& r : rows) empty += r.estimate.hits == 0 ? 1 : 0;
  log << "wrote " << (out / "scan.csv").string() << " (" << rows.size() << " balls, " << empty << " without hits)\n";
  return kOk;
}

}  // namespace qldp::cli
