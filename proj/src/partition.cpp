#include "qldp/partition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "qldp/csv.hpp"
#include "qldp/error.hpp"
#include "qldp/logspace.hpp"

namespace qldp {

namespace {

void check_phi(std::span<const double> phi, int dim) {
  if (phi.size() != static_cast<std::size_t>(dim)) {
    throw Error(ErrorCode::DimensionMismatch,
                "phi has dimension " + std::to_string(phi.size()) + ", model has " + std::to_string(dim));
  }
}

void check_horizon(EnvironmentView env, std::size_t t) {
  if (t > env.horizon()) {
    throw Error(ErrorCode::OutOfHorizon,
                "t=" + std::to_string(t) + " exceeds horizon " + std::to_string(env.horizon()));
  }
}

bool periodic_layout(EnvironmentView env) {
  const auto& spec = env.spec();
  if (spec.kind != EnvKind::Periodic) return false;
  const auto& traj = env.trajectory();
  for (std::size_t tau = 0; tau <= traj.horizon(); ++tau) {
    if (traj.letter_index(tau) != tau % spec.period) return false;
  }
  return true;
}

}  // namespace

StepLawSource::StepLawSource(const RenewalModel& model, EnvironmentView env, std::size_t t)
    : model_(model), env_(env), t_(t) {
  check_horizon(env, t);
  if (!periodic_layout(env)) return;
  period_ = env.spec().period;
  extended_.emplace(realize(env.trajectory().spec_ptr(), 0, period_ + static_cast<std::size_t>(model.s_max())));
  by_residue_.reserve(period_);
  for (std::size_t r = 0; r < period_; ++r) {
    by_residue_.push_back(model.step_law(extended_->view(), r, model.s_max()));
  }
}

const StepLaw& StepLawSource::at(std::size_t u) {
  if (cached()) return by_residue_[residue(u)];
  const std::size_t room = t_ - std::min(u, t_);
  const int limit = static_cast<int>(std::min<std::size_t>(room, static_cast<std::size_t>(model_.s_max())));
  scratch_ = model_.step_law(env_, u, limit);
  return scratch_;
}

RenewalDp renewal_dp(StepLawSource& source, std::span<const double> phi, bool want_free) {
  const RenewalModel& model = source.model();
  check_phi(phi, model.dim());
  const std::size_t t = source.t();
  const int s_max = model.s_max();

  // Per-residue weight rows when the laws are cached; one scratch row otherwise.
  std::vector<std::vector<double>> rows;
  if (source.cached()) {
    rows.resize(source.period());
    for (std::size_t r = 0; r < source.period(); ++r) {
      const StepLaw& law = source.residue_law(r);
      rows[r].resize(s_max);
      for (int s = 1; s <= s_max; ++s) rows[r][s - 1] = log_gibbs_weight(law, phi, s);
    }
  }
  std::vector<double> row(source.cached() ? 0 : s_max);

  std::vector<LogSumAccumulator> acc(t + 1);
  RenewalDp out;
  out.table.phi.assign(phi.begin(), phi.end());
  out.table.log_values.assign(t + 1, kNegInf);
  LogSumAccumulator free_acc;

  for (std::size_t u = 0; u <= t; ++u) {
    const double lz = (u == 0) ? 0.0 : acc[u].value();
    out.table.log_values[u] = lz;
    if (u == t) {
      if (want_free) free_acc.add(lz);
      break;
    }
    if (lz == kNegInf) continue;
    const int reach = static_cast<int>(std::min<std::size_t>(t - u, static_cast<std::size_t>(s_max)));
    const double* w = nullptr;
    const StepLaw& law = source.at(u);
    if (source.cached()) {
      w = rows[source.residue(u)].data();
    } else {
      for (int s = 1; s <= reach; ++s) row[s - 1] = log_gibbs_weight(law, phi, s);
      w = row.data();
    }
    if (want_free) free_acc.add(lz + law.log_tail_at(t - u, s_max));
    for (int s = 1; s <= reach; ++s) {
      if (w[s - 1] != kNegInf) acc[u + s].add(lz + w[s - 1]);
    }
  }
  if (want_free) out.log_free = free_acc.value();
  return out;
}

PartitionTable constrained_partition(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                     std::span<const double> phi) {
  StepLawSource source(model, env, t);
  return renewal_dp(source, phi, false).table;
}

double free_partition(const RenewalModel& model, EnvironmentView env, std::size_t t, std::span<const double> phi) {
  StepLawSource source(model, env, t);
  return *renewal_dp(source, phi, true).log_free;
}

double brute_force_partition(const RenewalModel& model, EnvironmentView env, std::size_t t,
                             std::span<const double> phi, bool constrained, double max_nodes) {
  check_phi(phi, model.dim());
  check_horizon(env, t);
  if (t > 14) throw Error(ErrorCode::TooLarge, "brute force is limited to t <= 14");

  const int s_max = model.s_max();
  std::vector<StepLaw> laws;
  laws.reserve(t + 1);
  for (std::size_t u = 0; u <= t; ++u) {
    const int limit = static_cast<int>(std::min<std::size_t>(t - u, static_cast<std::size_t>(s_max)));
    laws.push_back(model.step_law(env, u, limit));
  }

  // Leaf count bound: every (waiting time, atom) choice is a branch.
  std::vector<double> leaves(t + 1, 0.0);
  leaves[t] = 1.0;
  for (std::size_t u = t; u-- > 0;) {
    double n = constrained ? 0.0 : 1.0;
    for (int s = 1; s <= laws[u].resolved(); ++s) {
      n += static_cast<double>(laws[u].reward.atom_count(s)) * leaves[u + s];
    }
    leaves[u] = n;
  }
  if (leaves[0] > max_nodes) throw Error(ErrorCode::TooLarge, "enumeration exceeds the node budget");

  const std::size_t d = phi.size();
  double total = 0.0;
  std::function<void(std::size_t, double)> walk = [&](std::size_t pos, double weight) {
    if (pos == t) {
      total += weight;
      return;
    }
    const StepLaw& law = laws[pos];
    if (!constrained) total += weight * std::exp(law.log_tail_at(t - pos, s_max));
    for (int s = 1; s <= law.resolved(); ++s) {
      const double p = std::exp(law.log_prob[s - 1]);
      if (p == 0.0) continue;
      const double base = p * std::exp(law.potential[s - 1]);
      for (std::size_t k = 0; k < law.reward.atom_count(s); ++k) {
        const auto x = law.reward.point(s, k);
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j) dot += phi[j] * x[j];
        walk(pos + s, weight * base * law.reward.mass(s, k) * std::exp(dot));
      }
    }
  };
  walk(0, 1.0);
  return total > 0.0 ? std::log(total) : kNegInf;
}

double LatticeMeasure::mass(const std::vector<long long>& index) const {
  const auto it = log_mass.find(index);
  return it == log_mass.end() ? 0.0 : std::exp(it->second);
}

double LatticeMeasure::log_total() const {
  LogSumAccumulator acc;
  for (const auto& [key, lm] : log_mass) acc.add(lm);
  return acc.value();
}

double LatticeMeasure::log_ball_mass(std::span<const double> w, double delta) const {
  if (w.size() != grid_step.size()) throw Error(ErrorCode::DimensionMismatch, "ball center dimension");
  LogSumAccumulator acc;
  const double scale = static_cast<double>(std::max<std::size_t>(t, 1));
  for (const auto& [key, lm] : log_mass) {
    double dist2 = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double x = static_cast<double>(key[j]) * grid_step[j] / scale - w[j];
      dist2 += x * x;
    }
    if (std::sqrt(dist2) < delta) acc.add(lm);
  }
  return acc.value();
}

double LatticeMeasure::log_moment(std::span<const double> phi) const {
  if (phi.size() != grid_step.size()) throw Error(ErrorCode::DimensionMismatch, "phi dimension");
  LogSumAccumulator acc;
  for (const auto& [key, lm] : log_mass) {
    double dot = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) dot += phi[j] * static_cast<double>(key[j]) * grid_step[j];
    acc.add(lm + dot);
  }
  return acc.value();
}

namespace {

using Key = std::vector<long long>;
using Layer = std::map<Key, LogSumAccumulator>;

// Forward convolution of the lattice laws; layers[tau] is the mu-measure at tau.
std::vector<Layer> lattice_layers(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                  std::span<const double> grid_step, const LatticeOptions& options,
                                  std::vector<StepLaw>* laws_out) {
  check_horizon(env, t);
  const std::size_t d = static_cast<std::size_t>(model.dim());
  if (grid_step.size() != d) throw Error(ErrorCode::DimensionMismatch, "grid_step dimension");
  for (double g : grid_step) {
    if (!(g > 0.0)) throw Error(ErrorCode::InvalidSpec, "grid_step must be positive");
  }
  const int s_max = model.s_max();
  std::vector<Layer> layers(t + 1);
  layers[0][Key(d, 0)].add(0.0);
  std::size_t entries = 1;

  StepLawSource source(model, env, t);
  for (std::size_t u = 0; u <= t; ++u) {
    const StepLaw& law = source.at(u);
    if (laws_out) laws_out->push_back(law);
    if (u == t || layers[u].empty()) continue;
    const int reach = static_cast<int>(std::min<std::size_t>(t - u, static_cast<std::size_t>(s_max)));
    for (int s = 1; s <= reach; ++s) {
      const double lw = law.log_prob[s - 1];
      if (lw == kNegInf) continue;
      for (std::size_t k = 0; k < law.reward.atom_count(s); ++k) {
        const double lm = lw + law.potential[s - 1] + std::log(law.reward.mass(s, k));
        if (lm == kNegInf) continue;
        const auto x = law.reward.point(s, k);
        Key shift(d);
        for (std::size_t j = 0; j < d; ++j) {
          const double q = x[j] / grid_step[j];
          const double r = std::round(q);
          if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q))) {
            throw Error(ErrorCode::OffLattice, "reward atom is not on the lattice");
          }
          shift[j] = static_cast<long long>(r);
        }
        Layer& target = layers[u + s];
        for (const auto& [key, acc] : layers[u]) {
          Key moved = key;
          for (std::size_t j = 0; j < d; ++j) moved[j] += shift[j];
          auto [it, inserted] = target.try_emplace(std::move(moved));
          if (inserted && ++entries > options.max_entries) {
            throw Error(ErrorCode::MemoryCap, "lattice measure exceeds " + std::to_string(options.max_entries) +
                                                  " entries");
          }
          it->second.add(acc.value() + lm);
        }
      }
    }
  }
  return layers;
}

LatticeMeasure to_measure(const Layer& layer, std::span<const double> grid_step, std::size_t t) {
  LatticeMeasure m;
  m.grid_step.assign(grid_step.begin(), grid_step.end());
  m.t = t;
  for (const auto& [key, acc] : layer) {
    if (!acc.empty()) m.log_mass.emplace(key, acc.value());
  }
  return m;
}

}  // namespace

LatticeMeasure constrained_measure(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                   std::span<const double> grid_step, const LatticeOptions& options) {
  auto layers = lattice_layers(model, env, t, grid_step, options, nullptr);
  return to_measure(layers[t], grid_step, t);
}

LatticeMeasure free_measure(const RenewalModel& model, EnvironmentView env, std::size_t t,
                            std::span<const double> grid_step, const LatticeOptions& options) {
  std::vector<StepLaw> laws;
  auto layers = lattice_layers(model, env, t, grid_step, options, &laws);
  Layer merged;
  for (std::size_t tau = 0; tau <= t; ++tau) {
    const double tail = tau == t ? 0.0 : laws[tau].log_tail_at(t - tau, model.s_max());
    if (tail == kNegInf) continue;
    for (const auto& [key, acc] : layers[tau]) merged[key].add(acc.value() + tail);
  }
  return to_measure(merged, grid_step, t);
}

KingmanEstimate kingman_from_table(const PartitionTable& table, std::span<const std::size_t> t_list) {
  if (t_list.empty()) throw Error(ErrorCode::InvalidSpec, "t_list is empty");
  KingmanEstimate est;
  est.t_list.assign(t_list.begin(), t_list.end());
  bool any_finite = false;
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    const std::size_t t = t_list[i];
    if (i > 0 && t <= t_list[i - 1]) throw Error(ErrorCode::InvalidSpec, "t_list must be increasing");
    if (t > table.t()) throw Error(ErrorCode::OutOfHorizon, "t_list exceeds the table");
    if (t == 0) throw Error(ErrorCode::InvalidSpec, "t_list entries must be positive");
    const double v = table.log_z(t) / static_cast<double>(t);
    est.values.push_back(v);
    if (v != kNegInf) any_finite = true;
  }
  if (!any_finite) throw Error(ErrorCode::AllMinusInfinity, "Z vanishes at every t in t_list");
  est.estimate = est.values.back();
  const std::size_t from = est.values.size() >= 3 ? est.values.size() - 3 : 0;
  double lo = est.values[from];
  double hi = lo;
  for (std::size_t i = from; i < est.values.size(); ++i) {
    lo = std::min(lo, est.values[i]);
    hi = std::max(hi, est.values[i]);
  }
  est.spread = (lo == kNegInf) ? std::numeric_limits<double>::infinity() : hi - lo;
  return est;
}

KingmanEstimate kingman_cgf_estimate(const RenewalModel& model, EnvironmentView env, std::span<const double> phi,
                                     std::span<const std::size_t> t_list) {
  if (t_list.empty()) throw Error(ErrorCode::InvalidSpec, "t_list is empty");
  const std::size_t t_max = *std::max_element(t_list.begin(), t_list.end());
  check_horizon(env, t_max);
  return kingman_from_table(constrained_partition(model, env, t_max, phi), t_list);
}

std::vector<std::size_t> default_t_list(std::size_t t, std::size_t horizon) {
  std::vector<std::size_t> out;
  for (std::size_t k = t; k <= horizon && out.size() < 3; k *= 2) {
    out.push_back(k);
    if (k == 0) break;
  }
  if (out.empty()) out.push_back(horizon);
  return out;
}

void write_partition_csv(const PartitionTable& table, const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header({"tau", "log_Z"});
  for (std::size_t tau = 0; tau <= table.t(); ++tau) {
    csv.row_begin();
    csv.field(static_cast<long long>(tau));
    csv.field(table.log_z(tau));
    csv.row_end();
  }
}

void write_measure_csv(const LatticeMeasure& measure, const std::filesystem::path& path) {
  CsvWriter csv(path);
  std::vector<std::string> header;
  for (std::size_t j = 0; j < measure.grid_step.size(); ++j) header.push_back("lattice_index_" + std::to_string(j + 1));
  header.emplace_back("mass");
  csv.header(header);
  for (const auto& [key, lm] : measure.log_mass) {
    csv.row_begin();
    for (long long k : key) csv.field(k);
    csv.field(std::exp(lm));
    csv.row_end();
  }
}

}  // namespace qldp
