#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qldp {

/// One environment state: a label plus a flat record of real parameters whose
/// names live in the owning EnvironmentSpec.
struct Letter {
  std::string label;
  std::vector<double> params;
};

enum class EnvKind { Periodic, IidSequence, MarkovShift };

/// Description of the random environment (alphabet, dynamics and law).
///
/// - Periodic: `states` is the cycle, `period == states.size()`.
/// - IidSequence: letters drawn independently from `letter_law` over `states`.
/// - MarkovShift: stationary-start-free Markov chain over `states` with
///   row-stochastic `transition` and initial law `initial`.
struct EnvironmentSpec {
  EnvKind kind = EnvKind::Periodic;
  std::vector<std::string> param_names;
  std::vector<Letter> states;
  std::size_t period = 0;
  std::vector<double> letter_law;
  std::vector<std::vector<double>> transition;
  std::vector<double> initial;

  /// Throws Error{InvalidSpec} when an invariant fails.
  void validate() const;
  /// Index of a named parameter; throws InvalidSpec when absent.
  std::size_t param_index(const std::string& name) const;
  std::optional<std::size_t> find_param(const std::string& name) const;

  static EnvironmentSpec periodic(std::vector<std::string> param_names, std::vector<Letter> cycle);
  static EnvironmentSpec iid(std::vector<std::string> param_names, std::vector<Letter> alphabet,
                             std::vector<double> law);
  static EnvironmentSpec markov(std::vector<std::string> param_names, std::vector<Letter> alphabet,
                                std::vector<std::vector<double>> transition,
                                std::vector<double> initial);
};

class EnvironmentView;

/// A realized disorder sequence omega, f(omega), ..., f^horizon(omega).
/// Immutable after realization; letters are stored as indices into the
/// spec's alphabet.
class EnvironmentTrajectory {
 public:
  EnvironmentTrajectory(std::shared_ptr<const EnvironmentSpec> spec, std::vector<std::uint32_t> index,
                        std::optional<std::uint64_t> seed);

  std::size_t horizon() const { return index_.size() - 1; }
  std::size_t size() const { return index_.size(); }
  const Letter& letter(std::size_t tau) const { return spec_->states[index_[tau]]; }
  std::uint32_t letter_index(std::size_t tau) const { return index_[tau]; }
  double param(std::size_t tau, std::size_t k) const { return letter(tau).params[k]; }

  const EnvironmentSpec& spec() const { return *spec_; }
  const std::shared_ptr<const EnvironmentSpec>& spec_ptr() const { return spec_; }
  std::optional<std::uint64_t> seed() const { return seed_; }

  EnvironmentView view() const;

 private:
  std::shared_ptr<const EnvironmentSpec> spec_;
  std::vector<std::uint32_t> index_;
  std::optional<std::uint64_t> seed_;
};

/// Non-owning view of a trajectory shifted by `offset`: letter(i) is the
/// letter of f^(offset+i) omega. The underlying trajectory must outlive it.
class EnvironmentView {
 public:
  EnvironmentView(const EnvironmentTrajectory& traj)  // NOLINT(google-explicit-constructor)
      : traj_(&traj) {}
  EnvironmentView(const EnvironmentTrajectory& traj, std::size_t offset) : traj_(&traj), offset_(offset) {}

  std::size_t horizon() const { return traj_->horizon() - offset_; }
  std::size_t offset() const { return offset_; }
  const Letter& letter(std::size_t i) const { return traj_->letter(offset_ + i); }
  std::uint32_t letter_index(std::size_t i) const { return traj_->letter_index(offset_ + i); }
  double param(std::size_t i, std::size_t k) const { return traj_->param(offset_ + i, k); }
  const EnvironmentSpec& spec() const { return traj_->spec(); }
  const EnvironmentTrajectory& trajectory() const { return *traj_; }

  /// View of f^tau applied to this view. Throws OutOfHorizon if tau > horizon().
  EnvironmentView shift(std::size_t tau) const;

 private:
  const EnvironmentTrajectory* traj_;
  std::size_t offset_ = 0;
};

/// Samples omega from the environment law and stores horizon+1 letters.
/// Deterministic in (spec, seed, horizon); generation is sequential so a
/// longer horizon extends a shorter one with the same seed.
EnvironmentTrajectory realize(const EnvironmentSpec& spec, std::uint64_t seed, std::size_t horizon);
EnvironmentTrajectory realize(std::shared_ptr<const EnvironmentSpec> spec, std::uint64_t seed,
                              std::size_t horizon);

EnvironmentView shift(const EnvironmentTrajectory& traj, std::size_t tau);

/// (1/n) * sum_{tau < n} observable(letter(tau)).
double birkhoff_average(EnvironmentView env, const std::function<double(const Letter&)>& observable,
                        std::size_t n);

/// CSV with columns (tau, param_1, ..., param_k).
void write_trajectory_csv(const EnvironmentTrajectory& traj, const std::filesystem::path& path);
/// Reads a trajectory dumped by write_trajectory_csv; every row must match a
/// letter of `spec` exactly.
EnvironmentTrajectory read_trajectory_csv(std::shared_ptr<const EnvironmentSpec> spec,
                                          const std::filesystem::path& path);

}  // namespace qldp
