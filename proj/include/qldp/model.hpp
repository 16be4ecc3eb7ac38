#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qldp/env.hpp"

namespace qldp {

/// Waiting-time law on {1, ..., s_max} plus an explicit mass at infinity.
struct WaitingLaw {
  std::vector<double> probs;  // probs[s - 1] = p(s)
  double p_inf = 0.0;

  int s_max() const { return static_cast<int>(probs.size()); }
  double prob(int s) const { return s >= 1 && s <= s_max() ? probs[s - 1] : 0.0; }
  /// Throws InvalidSpec unless the masses are nonnegative and sum to 1 within 1e-12.
  void validate() const;
};

struct RewardAtom {
  std::vector<double> point;
  double mass = 0.0;
};

/// Finitely supported reward laws lambda(.|s), one bucket of atoms per
/// waiting time s. Storage is flat: the atoms of bucket s occupy
/// [offsets[s-1], offsets[s]).
class RewardLaw {
 public:
  explicit RewardLaw(int dim = 1) : dim_(dim) {}

  int dim() const { return dim_; }
  int buckets() const { return static_cast<int>(offsets_.size()) - 1; }
  std::size_t atom_count(int s) const { return offsets_[s] - offsets_[s - 1]; }
  std::span<const double> point(int s, std::size_t k) const {
    return {points_.data() + (offsets_[s - 1] + k) * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  double mass(int s, std::size_t k) const { return masses_[offsets_[s - 1] + k]; }

  /// Appends an atom to the bucket currently being filled.
  void add_atom(std::span<const double> point, double mass);
  /// Closes the current bucket; the next add_atom starts bucket s + 1.
  void close_bucket() { offsets_.push_back(masses_.size()); }
  void add_bucket(const std::vector<RewardAtom>& atoms);
  void reserve(std::size_t buckets, std::size_t atoms);

  /// log sum_k mass_k exp(phi . x_k) over bucket s; -inf for an empty bucket.
  double log_mgf(int s, std::span<const double> phi) const;

 private:
  int dim_;
  std::vector<std::size_t> offsets_{0};
  std::vector<double> points_;
  std::vector<double> masses_;
};

/// Law of the first renewal (S1, X1) and of the potential v(S1) for a
/// renewal started at a fixed position of the environment, resolved for
/// s = 1..resolved().
struct StepLaw {
  std::vector<double> log_prob;   // log p(s), index s - 1
  std::vector<double> potential;  // v(s), index s - 1
  RewardLaw reward;
  std::vector<double> log_tail;   // log P[S1 > s], index s; may extend past resolved()
  std::optional<double> log_p_inf;

  int resolved() const { return static_cast<int>(log_prob.size()); }
  /// log P[S1 > s]; throws OutOfHorizon when s lies beyond what was resolved.
  double log_tail_at(std::size_t s, int s_max) const;
};

/// Renewal model in a random environment: waiting-time law p, reward law
/// lambda(.|s) and potential v, all read off the environment at the
/// renewal's starting position. Laws may depend on letters ahead of the
/// start (arrival-site dependence); those models report reads_ahead().
class RenewalModel {
 public:
  RenewalModel(int s_max, int dim);
  virtual ~RenewalModel() = default;

  int s_max() const { return s_max_; }
  int dim() const { return dim_; }

  /// Step law at position tau of env for s = 1..s_limit (s_limit <= s_max).
  virtual StepLaw step_law(EnvironmentView env, std::size_t tau, int s_limit) const = 0;
  virtual bool reads_ahead() const { return false; }
  virtual std::string name() const = 0;

  /// Largest s_limit that step_law can resolve at tau without leaving the horizon.
  int max_resolvable(EnvironmentView env, std::size_t tau) const;

 protected:
  void check_position(EnvironmentView env, std::size_t tau, int s_limit) const;

 private:
  int s_max_;
  int dim_;
};

/// Per-letter tables for a model whose law depends only on the letter at the
/// renewal's start. The label "*" matches every letter without its own entry.
struct LetterTable {
  WaitingLaw waiting;
  RewardLaw reward;
  std::vector<double> potential;  // v(s), index s - 1; empty means v = 0
};

class TableModel final : public RenewalModel {
 public:
  TableModel(std::map<std::string, LetterTable> tables, int dim);

  StepLaw step_law(EnvironmentView env, std::size_t tau, int s_limit) const override;
  std::string name() const override { return "table"; }

  const LetterTable& table_for(const Letter& letter) const;

 private:
  static int max_s(const std::map<std::string, LetterTable>& tables);

  std::map<std::string, LetterTable> tables_;
};

/// Builds a homogeneous table (every letter) from p, scalar-or-vector rewards and v.
LetterTable make_letter_table(WaitingLaw waiting, const std::vector<std::vector<RewardAtom>>& rewards,
                              std::vector<double> potential = {});

/// exp(log gibbs weight): E[e^{phi(X1) + v(S1)} 1{S1 = s}] for a renewal started at tau.
double gibbs_weight(const RenewalModel& model, EnvironmentView env, std::size_t tau,
                    std::span<const double> phi, int s);
double log_gibbs_weight(const StepLaw& law, std::span<const double> phi, int s);

/// P_{f^tau omega}[S1 > s].
double tail_probability(const RenewalModel& model, EnvironmentView env, std::size_t tau, std::size_t s);
/// log P_{f^tau omega}[S1 > s]; stays finite where the probability underflows.
double log_tail_probability(const RenewalModel& model, EnvironmentView env, std::size_t tau, std::size_t s);

struct ModelDiagnostics {
  long support_gcd = 0;
  std::vector<int> support;  // union of waiting supports over sampled positions
  bool support_on_every_position = true;
  bool aperiodic = false;
  double reward_norm_bound = 0.0;
  double eta = 0.0;
  double potential_abs_bound = 0.0;
  double potential_excess_bound = 0.0;  // sup max(0, v(s) - eta*s)
  double potential_min = 0.0;
  bool proper = true;
  double max_p_inf = 0.0;
  std::vector<std::string> messages;
};

/// Desk-scale checks of aperiodicity, reward and potential bounds, and
/// properness over the first n_letters positions of env.
ModelDiagnostics validate(const RenewalModel& model, EnvironmentView env, std::size_t n_letters);

}  // namespace qldp
