#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qldp/env.hpp"
#include "qldp/error.hpp"
#include "qldp/logspace.hpp"
#include "qldp/model.hpp"

namespace qldp::test {

inline std::shared_ptr<const EnvironmentSpec> periodic(std::vector<std::string> labels,
                                                       std::vector<std::string> params = {},
                                                       std::vector<std::vector<double>> values = {}) {
  std::vector<Letter> letters;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    letters.push_back({labels[i], values.empty() ? std::vector<double>{} : values[i]});
  }
  return std::make_shared<const EnvironmentSpec>(EnvironmentSpec::periodic(std::move(params), std::move(letters)));
}

/// Homogeneous scalar model: every waiting time carries the same single reward atom.
inline TableModel homogeneous(std::vector<double> p, double p_inf = 0.0, std::vector<double> rewards = {},
                              std::vector<double> v = {}) {
  if (rewards.empty()) rewards.assign(p.size(), 1.0);
  std::vector<std::vector<RewardAtom>> atoms;
  for (double x : rewards) atoms.push_back({{{x}, 1.0}});
  std::map<std::string, LetterTable> t;
  t.emplace("*", make_letter_table(WaitingLaw{std::move(p), p_inf}, atoms, std::move(v)));
  return TableModel(std::move(t), 1);
}

/// The running example: p(1) = 0.6, p(2) = 0.4, one contact per renewal.
inline TableModel contact_06() { return homogeneous({0.6, 0.4}); }

/// Error code thrown by f, or nullopt when it returns normally.
template <class F>
std::optional<ErrorCode> error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace qldp::test
