#include "qldp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qldp/error.hpp"
#include "qldp/logspace.hpp"

namespace qldp {

namespace {

constexpr double kLawTolerance = 1e-12;

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

void check_phi(std::span<const double> phi, int dim) {
  if (phi.size() != static_cast<std::size_t>(dim)) {
    throw Error(ErrorCode::DimensionMismatch,
                "phi has dimension " + std::to_string(phi.size()) + ", model has " + std::to_string(dim));
  }
}

}  // namespace

void WaitingLaw::validate() const {
  if (probs.empty()) throw Error(ErrorCode::InvalidSpec, "waiting law needs s_max >= 1");
  double total = p_inf;
  if (!(p_inf >= 0.0)) throw Error(ErrorCode::InvalidSpec, "p_inf must be nonnegative");
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidSpec, "waiting law has a negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > kLawTolerance) {
    throw Error(ErrorCode::InvalidSpec, "waiting law sums to " + std::to_string(total) + ", expected 1");
  }
}

void RewardLaw::add_atom(std::span<const double> point, double mass) {
  if (point.size() != static_cast<std::size_t>(dim_)) {
    throw Error(ErrorCode::DimensionMismatch, "reward atom has dimension " + std::to_string(point.size()) +
                                                  ", expected " + std::to_string(dim_));
  }
  if (!(mass >= 0.0)) throw Error(ErrorCode::InvalidSpec, "reward atom mass must be nonnegative");
  points_.insert(points_.end(), point.begin(), point.end());
  masses_.push_back(mass);
}

void RewardLaw::add_bucket(const std::vector<RewardAtom>& atoms) {
  for (const auto& a : atoms) add_atom(a.point, a.mass);
  close_bucket();
}

void RewardLaw::reserve(std::size_t buckets, std::size_t atoms) {
  offsets_.reserve(buckets + 1);
  masses_.reserve(atoms);
  points_.reserve(atoms * static_cast<std::size_t>(dim_));
}

double RewardLaw::log_mgf(int s, std::span<const double> phi) const {
  const std::size_t begin = offsets_[s - 1];
  const std::size_t end = offsets_[s];
  if (begin == end) return kNegInf;
  if (end - begin == 1) {
    const double* x = points_.data() + begin * dim_;
    double dot = 0.0;
    for (int j = 0; j < dim_; ++j) dot += phi[j] * x[j];
    return safe_log(masses_[begin]) + dot;
  }
  LogSumAccumulator acc;
  for (std::size_t k = begin; k < end; ++k) {
    const double* x = points_.data() + k * dim_;
    double dot = 0.0;
    for (int j = 0; j < dim_; ++j) dot += phi[j] * x[j];
    acc.add(safe_log(masses_[k]) + dot);
  }
  return acc.value();
}

double StepLaw::log_tail_at(std::size_t s, int s_max) const {
  if (s < log_tail.size()) return log_tail[s];
  if (s >= static_cast<std::size_t>(s_max) && log_p_inf) return *log_p_inf;
  throw Error(ErrorCode::OutOfHorizon, "tail at s=" + std::to_string(s) + " was not resolved");
}

RenewalModel::RenewalModel(int s_max, int dim) : s_max_(s_max), dim_(dim) {
  if (s_max < 1) throw Error(ErrorCode::InvalidSpec, "s_max must be >= 1");
  if (dim < 1) throw Error(ErrorCode::InvalidSpec, "reward dimension must be >= 1");
}

int RenewalModel::max_resolvable(EnvironmentView env, std::size_t tau) const {
  if (tau > env.horizon()) return 0;
  if (!reads_ahead()) return s_max_;
  const std::size_t room = env.horizon() - tau;
  return static_cast<int>(std::min<std::size_t>(room, static_cast<std::size_t>(s_max_)));
}

void RenewalModel::check_position(EnvironmentView env, std::size_t tau, int s_limit) const {
  if (s_limit < 0 || s_limit > s_max_) {
    throw Error(ErrorCode::InvalidSpec, "s_limit " + std::to_string(s_limit) + " outside 0..s_max");
  }
  if (tau > env.horizon()) {
    throw Error(ErrorCode::OutOfHorizon,
                "position " + std::to_string(tau) + " beyond horizon " + std::to_string(env.horizon()));
  }
  if (reads_ahead() && tau + static_cast<std::size_t>(s_limit) > env.horizon()) {
    throw Error(ErrorCode::OutOfHorizon, "step law at " + std::to_string(tau) + " up to s=" +
                                             std::to_string(s_limit) + " reads past the horizon");
  }
}

TableModel::TableModel(std::map<std::string, LetterTable> tables, int dim)
    : RenewalModel(max_s(tables), dim), tables_(std::move(tables)) {
  for (const auto& [label, table] : tables_) {
    table.waiting.validate();
    if (table.reward.dim() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "reward law of '" + label + "' has the wrong dimension");
    }
    if (table.reward.buckets() < table.waiting.s_max()) {
      throw Error(ErrorCode::InvalidSpec, "reward law of '" + label + "' misses waiting times");
    }
    for (int s = 1; s <= table.waiting.s_max(); ++s) {
      if (table.waiting.prob(s) <= 0.0) continue;
      double mass = 0.0;
      for (std::size_t k = 0; k < table.reward.atom_count(s); ++k) mass += table.reward.mass(s, k);
      if (std::abs(mass - 1.0) > kLawTolerance) {
        throw Error(ErrorCode::InvalidSpec,
                    "reward law of '" + label + "' at s=" + std::to_string(s) + " does not sum to 1");
      }
    }
    if (!table.potential.empty() && table.potential.size() < table.waiting.probs.size()) {
      throw Error(ErrorCode::InvalidSpec, "potential of '" + label + "' misses waiting times");
    }
    for (double v : table.potential) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidSpec, "potential of '" + label + "' is not finite");
    }
  }
}

int TableModel::max_s(const std::map<std::string, LetterTable>& tables) {
  if (tables.empty()) throw Error(ErrorCode::InvalidSpec, "table model needs at least one letter table");
  int s = 0;
  for (const auto& entry : tables) s = std::max(s, entry.second.waiting.s_max());
  return s;
}

const LetterTable& TableModel::table_for(const Letter& letter) const {
  auto it = tables_.find(letter.label);
  if (it == tables_.end()) it = tables_.find("*");
  if (it == tables_.end()) throw Error(ErrorCode::InvalidSpec, "no table for letter '" + letter.label + "'");
  return it->second;
}

StepLaw TableModel::step_law(EnvironmentView env, std::size_t tau, int s_limit) const {
  check_position(env, tau, s_limit);
  const LetterTable& table = table_for(env.letter(tau));
  const int own = table.waiting.s_max();
  StepLaw law;
  law.reward = RewardLaw(dim());
  law.log_prob.resize(s_limit);
  law.potential.resize(s_limit);
  for (int s = 1; s <= s_limit; ++s) {
    law.log_prob[s - 1] = safe_log(table.waiting.prob(s));
    law.potential[s - 1] = (s <= own && !table.potential.empty()) ? table.potential[s - 1] : 0.0;
    if (s <= own) {
      for (std::size_t k = 0; k < table.reward.atom_count(s); ++k) {
        law.reward.add_atom(table.reward.point(s, k), table.reward.mass(s, k));
      }
    }
    law.reward.close_bucket();
  }
  // Tails depend on the letter only, so resolve them all the way to s_max.
  law.log_tail.resize(s_max() + 1);
  double suffix = table.waiting.p_inf;
  for (int s = s_max(); s >= 0; --s) {
    law.log_tail[s] = safe_log(suffix);
    if (s >= 1) suffix += table.waiting.prob(s);
  }
  law.log_tail[0] = 0.0;
  law.log_p_inf = safe_log(table.waiting.p_inf);
  return law;
}

LetterTable make_letter_table(WaitingLaw waiting, const std::vector<std::vector<RewardAtom>>& rewards,
                              std::vector<double> potential) {
  if (rewards.size() != waiting.probs.size()) {
    throw Error(ErrorCode::InvalidSpec, "need one reward bucket per waiting time");
  }
  int dim = 1;
  for (const auto& bucket : rewards) {
    if (!bucket.empty()) {
      dim = static_cast<int>(bucket.front().point.size());
      break;
    }
  }
  LetterTable table{std::move(waiting), RewardLaw(dim), std::move(potential)};
  for (const auto& bucket : rewards) table.reward.add_bucket(bucket);
  return table;
}

double log_gibbs_weight(const StepLaw& law, std::span<const double> phi, int s) {
  const double lp = law.log_prob[s - 1];
  if (lp == kNegInf) return kNegInf;
  return lp + law.potential[s - 1] + law.reward.log_mgf(s, phi);
}

double gibbs_weight(const RenewalModel& model, EnvironmentView env, std::size_t tau,
                    std::span<const double> phi, int s) {
  check_phi(phi, model.dim());
  if (s < 1 || s > model.s_max()) {
    throw Error(ErrorCode::InvalidSpec, "waiting time " + std::to_string(s) + " outside 1..s_max");
  }
  const StepLaw law = model.step_law(env, tau, s);
  return std::exp(log_gibbs_weight(law, phi, s));
}

double tail_probability(const RenewalModel& model, EnvironmentView env, std::size_t tau, std::size_t s) {
  return std::exp(log_tail_probability(model, env, tau, s));
}

double log_tail_probability(const RenewalModel& model, EnvironmentView env, std::size_t tau, std::size_t s) {
  if (tau > env.horizon()) {
    throw Error(ErrorCode::OutOfHorizon,
                "position " + std::to_string(tau) + " beyond horizon " + std::to_string(env.horizon()));
  }
  if (s == 0) return 0.0;
  const int want = static_cast<int>(std::min<std::size_t>(s, static_cast<std::size_t>(model.s_max())));
  if (model.max_resolvable(env, tau) < want) {
    throw Error(ErrorCode::OutOfHorizon, "tail at " + std::to_string(tau) + " needs letters past the horizon");
  }
  const StepLaw law = model.step_law(env, tau, want);
  return law.log_tail_at(s, model.s_max());
}

ModelDiagnostics validate(const RenewalModel& model, EnvironmentView env, std::size_t n_letters) {
  ModelDiagnostics d;
  const std::size_t n = std::min(n_letters, env.horizon() + 1);
  const int s_max = model.s_max();
  std::vector<std::size_t> hits(s_max + 1, 0);
  std::vector<std::size_t> eligible(s_max + 1, 0);
  bool first = true;
  for (std::size_t tau = 0; tau < n; ++tau) {
    const int limit = model.max_resolvable(env, tau);
    if (limit < 1) continue;
    const StepLaw law = model.step_law(env, tau, limit);
    for (int s = 1; s <= limit; ++s) {
      ++eligible[s];
      if (law.log_prob[s - 1] == kNegInf) continue;
      ++hits[s];
      const double v = law.potential[s - 1];
      if (first) {
        d.potential_min = v;
        first = false;
      }
      d.potential_abs_bound = std::max(d.potential_abs_bound, std::abs(v));
      d.potential_excess_bound = std::max(d.potential_excess_bound, v - d.eta * s);
      d.potential_min = std::min(d.potential_min, v);
      for (std::size_t k = 0; k < law.reward.atom_count(s); ++k) {
        double norm = 0.0;
        for (double x : law.reward.point(s, k)) norm += x * x;
        d.reward_norm_bound = std::max(d.reward_norm_bound, std::sqrt(norm));
      }
    }
    if (law.log_p_inf && limit == s_max) {
      const double p_inf = std::exp(*law.log_p_inf);
      d.max_p_inf = std::max(d.max_p_inf, p_inf);
      if (p_inf > kLawTolerance) d.proper = false;
    }
  }
  long g = 0;
  for (int s = 1; s <= s_max; ++s) {
    if (hits[s] == 0) continue;
    d.support.push_back(s);
    g = std::gcd(g, static_cast<long>(s));
    if (hits[s] != eligible[s]) d.support_on_every_position = false;
  }
  d.support_gcd = g;
  d.aperiodic = (g == 1);
  if (d.support.empty()) d.messages.emplace_back("no positive waiting mass on the sampled positions");
  if (g > 1) d.messages.emplace_back("aperiodicity condition violated (periodic support, gcd=" + std::to_string(g) + ")");
  if (g == 1 && !d.support_on_every_position) {
    d.messages.emplace_back("aperiodicity condition not uniform: some support points vanish on sampled positions");
  }
  d.messages.emplace_back(d.proper ? "proper waiting law" : "defective waiting law (p_inf > 0)");
  return d;
}

}  // namespace qldp
