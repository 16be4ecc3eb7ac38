#include "qldp/env.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qldp/csv.hpp"
#include "qldp/error.hpp"
#include "qldp/rng.hpp"

namespace qldp {

namespace {

constexpr double kLawTolerance = 1e-12;

double sum(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

void check_law(const std::vector<double>& law, std::size_t n, const std::string& what) {
  if (law.size() != n) {
    throw Error(ErrorCode::InvalidSpec, what + " has " + std::to_string(law.size()) +
                                            " entries, expected " + std::to_string(n));
  }
  for (double p : law) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidSpec, what + " has a negative entry");
  }
  if (std::abs(sum(law) - 1.0) > kLawTolerance) {
    throw Error(ErrorCode::InvalidSpec, what + " does not sum to 1");
  }
}

bool irreducible(const std::vector<std::vector<double>>& k) {
  const std::size_t n = k.size();
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      const std::size_t a = stack.back();
      stack.pop_back();
      for (std::size_t b = 0; b < n; ++b) {
        if (k[a][b] > 0.0 && !seen[b]) {
          seen[b] = true;
          stack.push_back(b);
        }
      }
    }
    for (bool s : seen) {
      if (!s) return false;
    }
  }
  return true;
}

}  // namespace

void EnvironmentSpec::validate() const {
  if (states.empty()) throw Error(ErrorCode::InvalidSpec, "environment has no states");
  for (const auto& letter : states) {
    if (letter.params.size() != param_names.size()) {
      throw Error(ErrorCode::InvalidSpec, "letter '" + letter.label + "' has " +
                                              std::to_string(letter.params.size()) + " params, expected " +
                                              std::to_string(param_names.size()));
    }
  }
  switch (kind) {
    case EnvKind::Periodic:
      if (period < 1 || period != states.size()) {
        throw Error(ErrorCode::InvalidSpec, "periodic environment needs period == number of states (>= 1)");
      }
      break;
    case EnvKind::IidSequence:
      check_law(letter_law, states.size(), "letter_law");
      break;
    case EnvKind::MarkovShift:
      if (transition.size() != states.size()) {
        throw Error(ErrorCode::InvalidSpec, "transition matrix must be square over the alphabet");
      }
      for (std::size_t a = 0; a < transition.size(); ++a) {
        check_law(transition[a], states.size(), "transition row " + std::to_string(a));
      }
      check_law(initial, states.size(), "initial distribution");
      if (!irreducible(transition)) throw Error(ErrorCode::InvalidSpec, "transition matrix is reducible");
      break;
  }
}

std::optional<std::size_t> EnvironmentSpec::find_param(const std::string& name) const {
  for (std::size_t k = 0; k < param_names.size(); ++k) {
    if (param_names[k] == name) return k;
  }
  return std::nullopt;
}

std::size_t EnvironmentSpec::param_index(const std::string& name) const {
  if (auto k = find_param(name)) return *k;
  throw Error(ErrorCode::InvalidSpec, "environment has no parameter named '" + name + "'");
}

EnvironmentSpec EnvironmentSpec::periodic(std::vector<std::string> param_names, std::vector<Letter> cycle) {
  EnvironmentSpec spec;
  spec.kind = EnvKind::Periodic;
  spec.param_names = std::move(param_names);
  spec.period = cycle.size();
  spec.states = std::move(cycle);
  return spec;
}

EnvironmentSpec EnvironmentSpec::iid(std::vector<std::string> param_names, std::vector<Letter> alphabet,
                                     std::vector<double> law) {
  EnvironmentSpec spec;
  spec.kind = EnvKind::IidSequence;
  spec.param_names = std::move(param_names);
  spec.states = std::move(alphabet);
  spec.letter_law = std::move(law);
  return spec;
}

EnvironmentSpec EnvironmentSpec::markov(std::vector<std::string> param_names, std::vector<Letter> alphabet,
                                        std::vector<std::vector<double>> transition,
                                        std::vector<double> initial) {
  EnvironmentSpec spec;
  spec.kind = EnvKind::MarkovShift;
  spec.param_names = std::move(param_names);
  spec.states = std::move(alphabet);
  spec.transition = std::move(transition);
  spec.initial = std::move(initial);
  return spec;
}

EnvironmentTrajectory::EnvironmentTrajectory(std::shared_ptr<const EnvironmentSpec> spec,
                                             std::vector<std::uint32_t> index,
                                             std::optional<std::uint64_t> seed)
    : spec_(std::move(spec)), index_(std::move(index)), seed_(seed) {
  if (index_.empty()) throw Error(ErrorCode::InvalidSpec, "trajectory needs at least one letter");
}

EnvironmentView EnvironmentTrajectory::view() const { return EnvironmentView(*this); }

EnvironmentView EnvironmentView::shift(std::size_t tau) const {
  if (tau > horizon()) {
    throw Error(ErrorCode::OutOfHorizon,
                "shift by " + std::to_string(tau) + " exceeds horizon " + std::to_string(horizon()));
  }
  return EnvironmentView(*traj_, offset_ + tau);
}

EnvironmentTrajectory realize(std::shared_ptr<const EnvironmentSpec> spec, std::uint64_t seed,
                              std::size_t horizon) {
  spec->validate();
  std::vector<std::uint32_t> index(horizon + 1);
  std::optional<std::uint64_t> stored_seed;
  switch (spec->kind) {
    case EnvKind::Periodic:
      for (std::size_t tau = 0; tau <= horizon; ++tau) {
        index[tau] = static_cast<std::uint32_t>(tau % spec->period);
      }
      break;
    case EnvKind::IidSequence: {
      stored_seed = seed;
      CounterRng rng(seed, 0);
      for (std::size_t tau = 0; tau <= horizon; ++tau) {
        index[tau] = static_cast<std::uint32_t>(sample_index(spec->letter_law, rng.uniform()));
      }
      break;
    }
    case EnvKind::MarkovShift: {
      stored_seed = seed;
      CounterRng rng(seed, 0);
      index[0] = static_cast<std::uint32_t>(sample_index(spec->initial, rng.uniform()));
      for (std::size_t tau = 1; tau <= horizon; ++tau) {
        index[tau] = static_cast<std::uint32_t>(sample_index(spec->transition[index[tau - 1]], rng.uniform()));
      }
      break;
    }
  }
  return EnvironmentTrajectory(std::move(spec), std::move(index), stored_seed);
}

EnvironmentTrajectory realize(const EnvironmentSpec& spec, std::uint64_t seed, std::size_t horizon) {
  return realize(std::make_shared<const EnvironmentSpec>(spec), seed, horizon);
}

EnvironmentView shift(const EnvironmentTrajectory& traj, std::size_t tau) { return traj.view().shift(tau); }

double birkhoff_average(EnvironmentView env, const std::function<double(const Letter&)>& observable,
                        std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidSpec, "birkhoff_average needs n >= 1");
  if (n > env.horizon()) {
    throw Error(ErrorCode::OutOfHorizon,
                "average over " + std::to_string(n) + " letters exceeds horizon " + std::to_string(env.horizon()));
  }
  double total = 0.0;
  for (std::size_t tau = 0; tau < n; ++tau) total += observable(env.letter(tau));
  return total / static_cast<double>(n);
}

void write_trajectory_csv(const EnvironmentTrajectory& traj, const std::filesystem::path& path) {
  CsvWriter csv(path);
  std::vector<std::string> header{"tau"};
  for (const auto& name : traj.spec().param_names) header.push_back(name);
  csv.header(header);
  for (std::size_t tau = 0; tau <= traj.horizon(); ++tau) {
    csv.row_begin();
    csv.field(static_cast<long long>(tau));
    for (double p : traj.letter(tau).params) csv.field(p);
    csv.row_end();
  }
}

EnvironmentTrajectory read_trajectory_csv(std::shared_ptr<const EnvironmentSpec> spec,
                                          const std::filesystem::path& path) {
  spec->validate();
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidSpec, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::uint32_t> index;
  const std::size_t k = spec->param_names.size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    const auto tau = std::stoull(cell);
    if (tau != index.size()) throw Error(ErrorCode::InvalidSpec, "trajectory rows out of order at tau=" + cell);
    std::vector<double> params;
    while (std::getline(ss, cell, ',')) params.push_back(std::stod(cell));
    if (params.size() != k) throw Error(ErrorCode::InvalidSpec, "row " + cell + " has wrong column count");
    std::optional<std::uint32_t> match;
    for (std::size_t a = 0; a < spec->states.size(); ++a) {
      bool same = true;
      for (std::size_t j = 0; j < k; ++j) {
        if (std::abs(spec->states[a].params[j] - params[j]) > 1e-12) same = false;
      }
      if (same) {
        match = static_cast<std::uint32_t>(a);
        break;
      }
    }
    if (!match) throw Error(ErrorCode::InvalidSpec, "row tau=" + std::to_string(tau) + " matches no letter");
    index.push_back(*match);
  }
  if (index.empty()) throw Error(ErrorCode::InvalidSpec, "trajectory file is empty");
  return EnvironmentTrajectory(std::move(spec), std::move(index), std::nullopt);
}

}  // namespace qldp
