#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qldp/env.hpp"
#include "qldp/model.hpp"

namespace qldp::examples {

// ---------------------------------------------------------------------------
// Compound Poisson: arrivals with probability rho at each site, rewards drawn
// from the law attached to the arrival site.

struct CompoundPoissonSpec {
  std::string rho_param = "rho";
  /// Reward atoms per letter label ("*" matches any letter); default delta_1.
  std::map<std::string, std::vector<RewardAtom>> rewards;
  int s_max = 1024;
};

class CompoundPoissonModel final : public RenewalModel {
 public:
  /// Throws InvalidRho unless every letter of `env` has rho in (0, 1).
  CompoundPoissonModel(const EnvironmentSpec& env, CompoundPoissonSpec spec);

  StepLaw step_law(EnvironmentView env, std::size_t tau, int s_limit) const override;
  bool reads_ahead() const override { return true; }
  std::string name() const override { return "compound_poisson"; }

 private:
  static int reward_dim(const CompoundPoissonSpec& spec);
  const std::vector<RewardAtom>& rewards_for(const Letter& letter) const;

  CompoundPoissonSpec spec_;
  std::vector<RewardAtom> default_rewards_;
};

CompoundPoissonModel compound_poisson_model(const EnvironmentSpec& env, CompoundPoissonSpec spec);

// ---------------------------------------------------------------------------
// Pinning: p(s) proportional to s^-(alpha+1) on 1..s_max, v(s) = h + beta * omega
// read at the arrival site.

enum class PinningObservable { Contacts, Excursions };

struct PinningSpec {
  double alpha = 0.5;
  double h = 0.0;
  double beta = 0.0;
  std::string disorder_param = "omega";
  int s_max = 1000;
  PinningObservable observable = PinningObservable::Contacts;
  double truncation_cap = 0.5;   // largest admissible truncated fraction of the tail sum
  int excursion_dim_cap = 64;
  /// Replaces the polynomial law (e.g. a geometric law for closed-form checks).
  std::optional<WaitingLaw> waiting;
};

class PinningModel final : public RenewalModel {
 public:
  explicit PinningModel(PinningSpec spec);

  StepLaw step_law(EnvironmentView env, std::size_t tau, int s_limit) const override;
  bool reads_ahead() const override { return spec_.beta != 0.0; }
  std::string name() const override { return "pinning"; }

  const WaitingLaw& waiting() const { return waiting_; }
  /// Fraction of sum_s s^-(alpha+1) lost to truncation (0 for an explicit law).
  double truncation_mass() const { return truncation_mass_; }
  const PinningSpec& spec() const { return spec_; }

 private:
  PinningSpec spec_;
  WaitingLaw waiting_;
  std::vector<double> log_p_;
  std::vector<double> log_tail_;
  double truncation_mass_ = 0.0;
};

PinningModel pinning_model(PinningSpec spec);

/// p(s) = s^-(alpha+1) / sum_{k <= s_max} k^-(alpha+1).
WaitingLaw polynomial_waiting_law(double alpha, int s_max);
/// sum_{s > s_max} s^-(alpha+1) / zeta(alpha+1); 1 when the series diverges.
double polynomial_truncation_mass(double alpha, int s_max);
/// p(s) = (1-q) q^(s-1) renormalized on 1..s_max.
WaitingLaw geometric_waiting_law(double q, int s_max);

/// Standard Gaussian disorder discretized by n-point Gauss-Hermite quadrature,
/// as an i.i.d. letter law with one parameter `param`.
EnvironmentSpec gauss_hermite_disorder(int nodes = 21, const std::string& param = "omega");

// ---------------------------------------------------------------------------
// Returns of a Markov chain in a dynamic environment to a distinguished state.

struct MarkovReturnSpec {
  int n_states = 2;   // C = {0, ..., n_states - 1}
  int c = 0;          // distinguished state
  /// Transition matrix per letter label ("*" matches any letter).
  std::map<std::string, std::vector<std::vector<double>>> K;
  int s_max = 1024;
};

class MarkovReturnModel final : public RenewalModel {
 public:
  explicit MarkovReturnModel(MarkovReturnSpec spec);

  StepLaw step_law(EnvironmentView env, std::size_t tau, int s_limit) const override;
  bool reads_ahead() const override { return true; }
  std::string name() const override { return "markov_return"; }

 private:
  const std::vector<std::vector<double>>& kernel_for(const Letter& letter) const;

  MarkovReturnSpec spec_;
};

MarkovReturnModel markov_return_model(MarkovReturnSpec spec);

// ---------------------------------------------------------------------------
// Closed-form oracles for homogeneous pinning.

/// h_c = -log sum_s p(s).
double pinning_critical_point(const WaitingLaw& p);
/// Unique F > 0 with sum_s p(s) e^{-F s} = e^{-h}, or 0 when h <= h_c.
double pinning_free_energy_homogeneous(const WaitingLaw& p, double h);
/// u = sum_s p(s) / sum_s s p(s).
double pinning_contact_fraction_u(const WaitingLaw& p);

}  // namespace qldp::examples
