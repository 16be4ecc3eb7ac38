#include "qldp/example_models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>

#include "qldp/error.hpp"
#include "qldp/logspace.hpp"

namespace qldp::examples {

namespace {

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

const std::vector<RewardAtom>& unit_reward() {
  static const std::vector<RewardAtom> atoms{{{1.0}, 1.0}};
  return atoms;
}

void check_rewards(const std::vector<RewardAtom>& atoms, int dim, const std::string& label) {
  double mass = 0.0;
  for (const auto& a : atoms) {
    if (a.point.size() != static_cast<std::size_t>(dim)) {
      throw Error(ErrorCode::DimensionMismatch, "reward atoms of '" + label + "' mix dimensions");
    }
    if (!(a.mass >= 0.0)) throw Error(ErrorCode::InvalidSpec, "negative reward mass for '" + label + "'");
    mass += a.mass;
  }
  if (std::abs(mass - 1.0) > 1e-12) throw Error(ErrorCode::InvalidSpec, "reward law of '" + label + "' does not sum to 1");
}

}  // namespace

// --- compound Poisson -------------------------------------------------------

int CompoundPoissonModel::reward_dim(const CompoundPoissonSpec& spec) {
  for (const auto& [label, atoms] : spec.rewards) {
    if (!atoms.empty()) return static_cast<int>(atoms.front().point.size());
  }
  return 1;
}

CompoundPoissonModel::CompoundPoissonModel(const EnvironmentSpec& env, CompoundPoissonSpec spec)
    : RenewalModel(spec.s_max, reward_dim(spec)), spec_(std::move(spec)) {
  const std::size_t k = env.param_index(spec_.rho_param);
  for (const auto& letter : env.states) {
    const double rho = letter.params[k];
    if (!(rho > 0.0 && rho < 1.0)) {
      throw Error(ErrorCode::InvalidRho, "rho=" + std::to_string(rho) + " at letter '" + letter.label + "'");
    }
  }
  for (const auto& [label, atoms] : spec_.rewards) check_rewards(atoms, dim(), label);
  if (spec_.rewards.find("*") == spec_.rewards.end()) {
    if (dim() != 1) throw Error(ErrorCode::InvalidSpec, "vector rewards need a '*' entry");
    default_rewards_ = unit_reward();
  } else {
    default_rewards_ = spec_.rewards.at("*");
  }
}

const std::vector<RewardAtom>& CompoundPoissonModel::rewards_for(const Letter& letter) const {
  const auto it = spec_.rewards.find(letter.label);
  return it == spec_.rewards.end() ? default_rewards_ : it->second;
}

StepLaw CompoundPoissonModel::step_law(EnvironmentView env, std::size_t tau, int s_limit) const {
  check_position(env, tau, s_limit);
  const std::size_t k = env.spec().param_index(spec_.rho_param);
  StepLaw law;
  law.reward = RewardLaw(dim());
  law.log_prob.resize(s_limit);
  law.potential.assign(s_limit, 0.0);
  law.log_tail.resize(s_limit + 1);
  law.log_tail[0] = 0.0;
  double survive = 0.0;  // log prod_{i < s} (1 - rho_{tau+i})
  for (int s = 1; s <= s_limit; ++s) {
    const double rho = env.param(tau + s, k);
    law.log_prob[s - 1] = survive + std::log(rho);
    survive += std::log1p(-rho);
    law.log_tail[s] = survive;
    law.reward.add_bucket(rewards_for(env.letter(tau + s)));
  }
  if (s_limit == s_max()) law.log_p_inf = survive;
  return law;
}

CompoundPoissonModel compound_poisson_model(const EnvironmentSpec& env, CompoundPoissonSpec spec) {
  return CompoundPoissonModel(env, std::move(spec));
}

// --- pinning ------------------------------------------------------------------

WaitingLaw polynomial_waiting_law(double alpha, int s_max) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidSpec, "alpha must be >= 0");
  if (s_max < 1) throw Error(ErrorCode::InvalidSpec, "s_max must be >= 1");
  WaitingLaw law;
  law.probs.resize(s_max);
  double total = 0.0;
  for (int s = s_max; s >= 1; --s) total += std::pow(static_cast<double>(s), -(alpha + 1.0));
  for (int s = 1; s <= s_max; ++s) law.probs[s - 1] = std::pow(static_cast<double>(s), -(alpha + 1.0)) / total;
  return law;
}

double polynomial_truncation_mass(double alpha, int s_max) {
  if (alpha <= 0.0) return 1.0;
  const double full = boost::math::zeta(alpha + 1.0);
  double head = 0.0;
  for (int s = s_max; s >= 1; --s) head += std::pow(static_cast<double>(s), -(alpha + 1.0));
  return std::max(0.0, full - head) / full;
}

WaitingLaw geometric_waiting_law(double q, int s_max) {
  if (!(q >= 0.0 && q < 1.0)) throw Error(ErrorCode::InvalidSpec, "geometric q must lie in [0, 1)");
  if (s_max < 1) throw Error(ErrorCode::InvalidSpec, "s_max must be >= 1");
  WaitingLaw law;
  law.probs.resize(s_max);
  double total = 0.0;
  for (int s = 1; s <= s_max; ++s) {
    law.probs[s - 1] = (1.0 - q) * std::pow(q, s - 1);
    total += law.probs[s - 1];
  }
  for (double& p : law.probs) p /= total;
  return law;
}

PinningModel::PinningModel(PinningSpec spec)
    : RenewalModel(spec.waiting ? spec.waiting->s_max() : spec.s_max,
                   spec.observable == PinningObservable::Excursions
                       ? (spec.waiting ? spec.waiting->s_max() : spec.s_max)
                       : 1),
      spec_(std::move(spec)) {
  if (s_max() < 2 && !spec_.waiting) throw Error(ErrorCode::InvalidSpec, "pinning needs s_max >= 2");
  if (spec_.observable == PinningObservable::Excursions && dim() > spec_.excursion_dim_cap) {
    throw Error(ErrorCode::CapExceeded, "excursion observable needs d = s_max <= " +
                                            std::to_string(spec_.excursion_dim_cap));
  }
  if (spec_.waiting) {
    waiting_ = *spec_.waiting;
    waiting_.validate();
  } else {
    waiting_ = polynomial_waiting_law(spec_.alpha, spec_.s_max);
    truncation_mass_ = polynomial_truncation_mass(spec_.alpha, spec_.s_max);
    if (truncation_mass_ > spec_.truncation_cap) {
      throw Error(ErrorCode::CapExceeded, "truncated tail mass " + std::to_string(truncation_mass_) +
                                              " exceeds the cap " + std::to_string(spec_.truncation_cap));
    }
  }
  const int n = s_max();
  log_p_.resize(n);
  log_tail_.resize(n + 1);
  double suffix = waiting_.p_inf;
  for (int s = n; s >= 0; --s) {
    log_tail_[s] = safe_log(suffix);
    if (s >= 1) {
      log_p_[s - 1] = safe_log(waiting_.probs[s - 1]);
      suffix += waiting_.probs[s - 1];
    }
  }
  log_tail_[0] = 0.0;
}

StepLaw PinningModel::step_law(EnvironmentView env, std::size_t tau, int s_limit) const {
  check_position(env, tau, s_limit);
  StepLaw law;
  law.reward = RewardLaw(dim());
  law.log_prob.assign(log_p_.begin(), log_p_.begin() + s_limit);
  law.potential.resize(s_limit);
  const std::size_t k = spec_.beta != 0.0 ? env.spec().param_index(spec_.disorder_param) : 0;
  std::vector<double> e(dim(), 0.0);
  for (int s = 1; s <= s_limit; ++s) {
    law.potential[s - 1] = spec_.h + (spec_.beta != 0.0 ? spec_.beta * env.param(tau + s, k) : 0.0);
    if (spec_.observable == PinningObservable::Contacts) {
      const double one[1] = {1.0};
      law.reward.add_atom(one, 1.0);
    } else {
      e[s - 1] = 1.0;
      law.reward.add_atom(e, 1.0);
      e[s - 1] = 0.0;
    }
    law.reward.close_bucket();
  }
  law.log_tail = log_tail_;
  law.log_p_inf = log_tail_.back();
  return law;
}

PinningModel pinning_model(PinningSpec spec) { return PinningModel(std::move(spec)); }

EnvironmentSpec gauss_hermite_disorder(int nodes, const std::string& param) {
  if (nodes < 1) throw Error(ErrorCode::InvalidSpec, "need at least one quadrature node");
  // Golub-Welsch for the probabilists' Hermite weight exp(-x^2/2)/sqrt(2 pi).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) {
    jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
    jacobi(k, k - 1) = jacobi(k - 1, k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  std::vector<Letter> letters;
  std::vector<double> law;
  double total = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const double v0 = eig.eigenvectors()(0, k);
    law.push_back(v0 * v0);
    total += v0 * v0;
    letters.push_back({"gh" + std::to_string(k), {eig.eigenvalues()(k)}});
  }
  for (double& w : law) w /= total;
  return EnvironmentSpec::iid({param}, std::move(letters), std::move(law));
}

// --- Markov returns -------------------------------------------------------------

MarkovReturnModel::MarkovReturnModel(MarkovReturnSpec spec) : RenewalModel(spec.s_max, 1), spec_(std::move(spec)) {
  const int n = spec_.n_states;
  if (n < 1) throw Error(ErrorCode::InvalidSpec, "Markov return model needs at least one state");
  if (n > 5) throw Error(ErrorCode::TooManyStates, "subset enumeration supports |C| <= 5");
  if (spec_.c < 0 || spec_.c >= n) throw Error(ErrorCode::InvalidSpec, "distinguished state outside C");
  if (spec_.K.empty()) throw Error(ErrorCode::InvalidSpec, "Markov return model needs a transition matrix");
  for (const auto& [label, k] : spec_.K) {
    if (k.size() != static_cast<std::size_t>(n)) throw Error(ErrorCode::InvalidSpec, "K of '" + label + "' is not |C| x |C|");
    for (const auto& row : k) {
      if (row.size() != static_cast<std::size_t>(n)) {
        throw Error(ErrorCode::InvalidSpec, "K of '" + label + "' is not |C| x |C|");
      }
      double sum = 0.0;
      for (double x : row) {
        if (!(x >= 0.0)) throw Error(ErrorCode::InvalidSpec, "K of '" + label + "' has a negative entry");
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-12) throw Error(ErrorCode::InvalidSpec, "K of '" + label + "' is not row-stochastic");
    }
  }
}

const std::vector<std::vector<double>>& MarkovReturnModel::kernel_for(const Letter& letter) const {
  auto it = spec_.K.find(letter.label);
  if (it == spec_.K.end()) it = spec_.K.find("*");
  if (it == spec_.K.end()) throw Error(ErrorCode::InvalidSpec, "no K for letter '" + letter.label + "'");
  return it->second;
}

StepLaw MarkovReturnModel::step_law(EnvironmentView env, std::size_t tau, int s_limit) const {
  check_position(env, tau, s_limit);
  const int n = spec_.n_states;
  const int c = spec_.c;
  const int masks = 1 << n;
  StepLaw law;
  law.reward = RewardLaw(1);
  law.log_prob.assign(s_limit, kNegInf);
  law.potential.assign(s_limit, 0.0);
  law.log_tail.assign(s_limit + 1, kNegInf);
  law.log_tail[0] = 0.0;

  // mass[a * masks + m]: paths c -> a_1 .. a_k = a avoiding c, visited set m,
  // kept normalized with a running log scale.
  std::vector<double> mass(static_cast<std::size_t>(n) * masks, 0.0);
  std::vector<double> next(mass.size());
  double scale = 0.0;
  std::vector<double> by_count(n + 2);

  for (int s = 1; s <= s_limit; ++s) {
    const auto& K = kernel_for(env.letter(tau + s - 1));
    std::fill(by_count.begin(), by_count.end(), 0.0);
    double ret = 0.0;
    std::fill(next.begin(), next.end(), 0.0);
    if (s == 1) {
      ret = K[c][c];
      by_count[1] = ret;
      for (int b = 0; b < n; ++b) {
        if (b != c) next[b * masks + (1 << b)] = K[c][b];
      }
    } else {
      for (int a = 0; a < n; ++a) {
        if (a == c) continue;
        for (int m = 0; m < masks; ++m) {
          const double x = mass[a * masks + m];
          if (x == 0.0) continue;
          const double back = x * K[a][c];
          ret += back;
          by_count[std::popcount(static_cast<unsigned>(m)) + 1] += back;
          for (int b = 0; b < n; ++b) {
            if (b != c && K[a][b] > 0.0) next[b * masks + (m | (1 << b))] += x * K[a][b];
          }
        }
      }
    }
    law.log_prob[s - 1] = safe_log(ret) + (ret > 0.0 ? scale : 0.0);
    if (ret > 0.0) {
      for (int cnt = 0; cnt <= n + 1; ++cnt) {
        if (by_count[cnt] > 0.0) {
          const double point[1] = {static_cast<double>(cnt)};
          law.reward.add_atom(point, by_count[cnt] / ret);
        }
      }
    } else {
      const double zero[1] = {0.0};
      law.reward.add_atom(zero, 1.0);
    }
    law.reward.close_bucket();

    double alive = 0.0;
    for (double x : next) alive += x;
    if (alive > 0.0) {
      for (double& x : next) x /= alive;
      scale += std::log(alive);
      law.log_tail[s] = scale;
    } else {
      law.log_tail[s] = kNegInf;
    }
    mass.swap(next);
  }
  if (s_limit == s_max()) law.log_p_inf = law.log_tail[s_limit];
  return law;
}

MarkovReturnModel markov_return_model(MarkovReturnSpec spec) { return MarkovReturnModel(std::move(spec)); }

// --- homogeneous pinning oracles ----------------------------------------------

double pinning_critical_point(const WaitingLaw& p) {
  double total = 0.0;
  for (double x : p.probs) total += x;
  return -std::log(total);
}

double pinning_free_energy_homogeneous(const WaitingLaw& p, double h) {
  const double h_c = pinning_critical_point(p);
  if (h <= h_c) return 0.0;
  // log sum_s p(s) e^{-F s} + h, strictly decreasing in F.
  auto excess = [&](double F) {
    LogSumAccumulator acc;
    for (int s = 1; s <= p.s_max(); ++s) {
      if (p.probs[s - 1] > 0.0) acc.add(std::log(p.probs[s - 1]) - F * s);
    }
    return acc.value() + h;
  };
  double lo = 0.0;
  double hi = std::max(h, 1e-12);
  while (excess(hi) > 0.0) hi *= 2.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double pinning_contact_fraction_u(const WaitingLaw& p) {
  double mass = 0.0;
  double mean = 0.0;
  for (int s = 1; s <= p.s_max(); ++s) {
    mass += p.probs[s - 1];
    mean += s * p.probs[s - 1];
  }
  if (!(mean > 0.0) || !std::isfinite(mean)) return 0.0;
  return mass / mean;
}

}  // namespace qldp::examples
