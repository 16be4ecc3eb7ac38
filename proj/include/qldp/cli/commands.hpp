#pragma once

#include <ostream>

#include "qldp/cli/config.hpp"
#include "qldp/error.hpp"

namespace qldp::cli {

enum ExitCode : int { kOk = 0, kNumerical = 1, kInvalidInput = 2, kResourceCap = 3 };

int exit_code_for(ErrorCode code);

/// z(phi) by the Kingman route and, on periodic environments, the
/// variational route. Writes cgf.csv (phi..., z, source) and, when both
/// routes ran, cgf_routes.csv with their gap. Returns kNumerical when the
/// gap exceeds route_tolerance.
int cmd_cgf(const ExperimentConfig& config, std::ostream& log);
/// Rate curve over w_grid; writes rate.csv.
int cmd_rate(const ExperimentConfig& config, std::ostream& log);
/// Monte Carlo ball-mass scan over w_grid; writes scan.csv.
int cmd_simulate(const ExperimentConfig& config, std::ostream& log);

}  // namespace qldp::cli
