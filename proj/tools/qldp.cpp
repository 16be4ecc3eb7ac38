#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "qldp/cli/commands.hpp"
#include "qldp/cli/config.hpp"
#include "qldp/cli/verify.hpp"
#include "qldp/error.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string route;
  std::string kind;
};

qldp::cli::ExperimentConfig load(const Overrides& o) {
  if (o.config.empty()) throw qldp::Error(qldp::ErrorCode::InvalidConfig, "--config is required");
  auto config = qldp::cli::load_config(o.config);
  if (!o.out.empty()) config.output_dir = o.out;
  if (o.seed) config.seed = *o.seed;
  if (!o.route.empty()) config.route = qldp::cli::parse_route(o.route);
  if (!o.kind.empty()) config.kind = qldp::cli::parse_kind(o.kind);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quenched free energies and rate functions of renewal-reward processes"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "experiment config (JSON)");
  app.add_option("--out", o.out, "output directory (overrides output_dir)");
  app.add_option("--seed", o.seed, "seed (overrides the config)");
  app.add_option("--route", o.route, "kingman | variational | both")
      ->check(CLI::IsMember({"kingman", "variational", "both"}));
  app.add_option("--kind", o.kind, "constrained | free")->check(CLI::IsMember({"constrained", "free"}));

  auto* cgf = app.add_subcommand("cgf", "z(phi) on phi_grid by the configured routes; writes cgf.csv");
  auto* rate = app.add_subcommand("rate", "rate function on w_grid; writes rate.csv");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo ball masses on w_grid; writes scan.csv");
  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  std::vector<int> criteria;
  qldp::cli::VerifyOptions vopts;
  std::string scratch;
  verify->add_option("--criterion", criteria, "criterion ids (default: all)");
  verify->add_option("--scratch", scratch, "directory for temporary outputs");
  verify->add_flag("--inject-broken-dp", vopts.inject_broken_dp)->group("");
  for (auto* sub : {cgf, rate, simulate, verify}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!scratch.empty()) vopts.scratch_dir = scratch;
    if (*verify) return qldp::cli::cmd_verify(criteria, vopts, std::cout);
    const auto config = load(o);
    if (*cgf) return qldp::cli::cmd_cgf(config, std::cerr);
    if (*rate) return qldp::cli::cmd_rate(config, std::cerr);
    if (*simulate) return qldp::cli::cmd_simulate(config, std::cerr);
  } catch (const qldp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qldp::cli::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qldp::cli::kNumerical;
  }
  return qldp::cli::kOk;
}
