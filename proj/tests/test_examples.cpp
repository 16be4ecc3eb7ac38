#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <map>

#include "qldp/example_models.hpp"
#include "qldp/model.hpp"
#include "qldp/rng.hpp"
#include "support.hpp"

using namespace qldp;
using namespace qldp::examples;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double prob(const StepLaw& law, int s) { return std::exp(law.log_prob[s - 1]); }

// Path-sum oracle for return times: p(s) and the law of (distinct states + 1).
struct ReturnOracle {
  std::vector<double> p;
  std::vector<std::map<int, double>> counts;
};

ReturnOracle enumerate_returns(const MarkovReturnSpec& spec, EnvironmentView env, std::size_t tau, int s_top) {
  ReturnOracle out;
  out.p.assign(s_top, 0.0);
  out.counts.assign(s_top, {});
  auto kernel = [&](int step) -> const std::vector<std::vector<double>>& {
    const auto& label = env.letter(tau + step - 1).label;
    const auto it = spec.K.find(label);
    return it != spec.K.end() ? it->second : spec.K.at("*");
  };
  std::function<void(int, int, unsigned, double)> go = [&](int state, int step, unsigned seen, double w) {
    if (step > s_top || w == 0.0) return;
    const auto& K = kernel(step);
    for (int b = 0; b < spec.n_states; ++b) {
      const double x = w * K[state][b];
      if (x == 0.0) continue;
      if (b == spec.c) {
        out.p[step - 1] += x;
        out.counts[step - 1][std::popcount(seen) + 1] += x;
      } else {
        go(b, step + 1, seen | (1u << b), x);
      }
    }
  };
  go(spec.c, 1, 0u, 1.0);
  return out;
}

std::vector<std::vector<double>> random_stochastic(CounterRng& rng, int n) {
  std::vector<std::vector<double>> K(n, std::vector<double>(n));
  for (auto& row : K) {
    double s = 0.0;
    for (double& x : row) {
      x = rng.uniform() < 0.25 ? 0.0 : rng.uniform();
      s += x;
    }
    if (s == 0.0) {
      row[0] = 1.0;
      s = 1.0;
    }
    for (double& x : row) x /= s;
  }
  return K;
}

}  // namespace

TEST_CASE("compound Poisson on a period-2 environment") {
  const auto env = test::periodic({"lo", "hi"}, {"rho"}, {{0.3}, {0.6}});
  CompoundPoissonSpec spec;
  spec.rewards["lo"] = {{{1.0}, 0.5}, {{2.0}, 0.5}};
  spec.rewards["hi"] = {{{1.0}, 1.0}};
  spec.s_max = 200;
  const auto m = compound_poisson_model(*env, spec);
  const auto traj = realize(env, 0, 400);
  const auto law = m.step_law(traj.view(), 0, 200);
  CHECK_THAT(prob(law, 1), WithinRel(0.6, 1e-14));
  CHECK_THAT(prob(law, 2), WithinRel(0.4 * 0.3, 1e-14));
  CHECK_THAT(prob(law, 3), WithinRel(0.4 * 0.7 * 0.6, 1e-14));
  double total = law.log_p_inf ? std::exp(*law.log_p_inf) : 0.0;
  for (int s = 1; s <= 200; ++s) total += prob(law, s);
  CHECK_THAT(total, WithinAbs(1.0, 1e-12));
  CHECK(law.reward.atom_count(1) == 1);
  CHECK(law.reward.atom_count(2) == 2);
  CHECK_THAT(law.reward.mass(2, 1), WithinAbs(0.5, 1e-15));
  CHECK_THAT(std::exp(law.log_tail[1]), WithinRel(0.4, 1e-14));
  CHECK(m.reads_ahead());

  const auto shifted = m.step_law(traj.view(), 1, 10);
  CHECK_THAT(prob(shifted, 1), WithinRel(0.3, 1e-14));

  const auto bad = test::periodic({"a"}, {"rho"}, {{1.0}});
  CHECK(test::error_code_of([&] { compound_poisson_model(*bad, {}); }) == ErrorCode::InvalidRho);
  const auto zero = test::periodic({"a"}, {"rho"}, {{0.0}});
  CHECK(test::error_code_of([&] { compound_poisson_model(*zero, {}); }) == ErrorCode::InvalidRho);
}

TEST_CASE("Markov returns: two-state closed form") {
  MarkovReturnSpec spec;
  spec.n_states = 2;
  spec.K["*"] = {{0.5, 0.5}, {0.3, 0.7}};
  spec.s_max = 64;
  const auto m = markov_return_model(spec);
  const auto traj = realize(test::periodic({"x"}), 0, 128);
  const auto law = m.step_law(traj.view(), 0, 64);
  CHECK_THAT(prob(law, 1), WithinRel(0.5, 1e-14));
  for (int s = 2; s <= 40; ++s) CHECK_THAT(prob(law, s), WithinRel(0.5 * std::pow(0.7, s - 2) * 0.3, 1e-12));
  CHECK(law.reward.atom_count(1) == 1);
  CHECK(law.reward.point(1, 0)[0] == 1.0);
  for (int s = 2; s <= 10; ++s) {
    REQUIRE(law.reward.atom_count(s) == 1);
    CHECK(law.reward.point(s, 0)[0] == 2.0);
  }
  CHECK_THAT(std::exp(law.log_tail[1]), WithinRel(0.5, 1e-14));
  CHECK_THAT(std::exp(law.log_tail[2]), WithinRel(0.35, 1e-14));
  // no underflow far out in the tail
  CHECK_THAT(law.log_tail[64], WithinRel(std::log(0.5) + 63 * std::log(0.7), 1e-12));

  MarkovReturnSpec single;
  single.n_states = 1;
  single.K["*"] = {{1.0}};
  single.s_max = 4;
  const auto one = markov_return_model(single).step_law(traj.view(), 0, 4);
  CHECK(prob(one, 1) == 1.0);
  CHECK(one.log_tail[1] == kNegInf);

  MarkovReturnSpec big;
  big.n_states = 6;
  big.K["*"] = std::vector<std::vector<double>>(6, std::vector<double>(6, 1.0 / 6));
  CHECK(test::error_code_of([&] { markov_return_model(big); }) == ErrorCode::TooManyStates);
}

TEST_CASE("property: Markov returns match path enumeration") {
  const auto env = test::periodic({"A", "B", "A", "C"});
  const auto traj = realize(env, 0, 64);
  for (std::uint64_t k = 0; k < 24; ++k) {
    CounterRng rng(404, k);
    MarkovReturnSpec spec;
    spec.n_states = 1 + static_cast<int>(rng.uniform() * 3.0);
    spec.c = static_cast<int>(rng.uniform() * spec.n_states);
    for (const char* l : {"A", "B", "C"}) spec.K[l] = random_stochastic(rng, spec.n_states);
    spec.s_max = 6;
    const auto m = markov_return_model(spec);
    const std::size_t tau = k % 4;
    const auto law = m.step_law(traj.view(), tau, 6);
    const auto oracle = enumerate_returns(spec, traj.view(), tau, 6);
    for (int s = 1; s <= 6; ++s) {
      if (oracle.p[s - 1] == 0.0) {
        CHECK(law.log_prob[s - 1] == kNegInf);
        continue;
      }
      CHECK_THAT(prob(law, s), WithinRel(oracle.p[s - 1], 1e-12));
      std::map<int, double> got;
      for (std::size_t a = 0; a < law.reward.atom_count(s); ++a) {
        got[static_cast<int>(law.reward.point(s, a)[0])] += law.reward.mass(s, a);
      }
      for (const auto& [cnt, mass] : oracle.counts[s - 1]) {
        CHECK_THAT(got[cnt], WithinAbs(mass / oracle.p[s - 1], 1e-12));
      }
    }
    double tail = 1.0;
    for (int s = 1; s <= 6; ++s) {
      tail -= oracle.p[s - 1];
      if (tail > 1e-12) CHECK_THAT(std::exp(law.log_tail[s]), WithinRel(tail, 1e-9));
    }
  }
}

TEST_CASE("pinning observables") {
  const auto env = test::periodic({"x"}, {"omega"}, {{0.0}});
  const auto traj = realize(env, 0, 20);
  PinningSpec s;
  s.alpha = 0.5;
  s.s_max = 3;
  s.truncation_cap = 1.0;
  s.h = 0.25;
  s.observable = PinningObservable::Excursions;
  const auto m = pinning_model(s);
  CHECK(m.dim() == 3);
  const auto law = m.step_law(traj.view(), 0, 3);
  for (int k = 1; k <= 3; ++k) {
    const auto x = law.reward.point(k, 0);
    for (int j = 0; j < 3; ++j) CHECK(x[j] == (j == k - 1 ? 1.0 : 0.0));
    CHECK(law.potential[k - 1] == 0.25);
  }
  s.observable = PinningObservable::Contacts;
  const auto c = pinning_model(s).step_law(traj.view(), 0, 3);
  for (int k = 1; k <= 3; ++k) CHECK(c.reward.point(k, 0)[0] == 1.0);

  const double z = 1.0 / (1.0 + std::pow(2.0, -1.5) + std::pow(3.0, -1.5));
  CHECK_THAT(prob(law, 1), WithinRel(z, 1e-14));
  CHECK_THAT(prob(law, 3), WithinRel(z * std::pow(3.0, -1.5), 1e-14));
  CHECK_FALSE(pinning_model(s).reads_ahead());

  s.observable = PinningObservable::Excursions;
  s.s_max = 100;
  CHECK(test::error_code_of([&] { pinning_model(s); }) == ErrorCode::CapExceeded);
  PinningSpec t;
  t.alpha = 0.1;
  t.s_max = 10;
  CHECK(test::error_code_of([&] { pinning_model(t); }) == ErrorCode::CapExceeded);
  t.alpha = 0.5;
  t.s_max = 1000;
  CHECK_NOTHROW(pinning_model(t));
  CHECK(pinning_model(t).truncation_mass() > 0.0);
  CHECK(pinning_model(t).truncation_mass() < 0.5);
}

TEST_CASE("disordered pinning reads the arrival site") {
  const auto env = test::periodic({"a", "b"}, {"omega"}, {{1.0}, {-1.0}});
  const auto traj = realize(env, 0, 20);
  PinningSpec s;
  s.s_max = 4;
  s.truncation_cap = 1.0;
  s.h = 0.1;
  s.beta = 0.5;
  const auto m = pinning_model(s);
  CHECK(m.reads_ahead());
  const auto law = m.step_law(traj.view(), 0, 4);
  CHECK_THAT(law.potential[0], WithinAbs(0.1 - 0.5, 1e-15));
  CHECK_THAT(law.potential[1], WithinAbs(0.1 + 0.5, 1e-15));
}

TEST_CASE("homogeneous pinning closed forms") {
  const auto g = geometric_waiting_law(0.5, 60);
  CHECK_THAT(pinning_free_energy_homogeneous(g, 1.0), WithinAbs(1.0 + std::log(0.5 + 0.5 * std::exp(-1.0)), 1e-10));
  CHECK_THAT(pinning_free_energy_homogeneous(g, 1.0), WithinAbs(0.6201145, 1e-7));
  CHECK_THAT(pinning_critical_point(g), WithinAbs(0.0, 1e-12));
  CHECK(pinning_free_energy_homogeneous(g, 0.0) == 0.0);
  CHECK(pinning_free_energy_homogeneous(g, -0.3) == 0.0);

  const auto poly = polynomial_waiting_law(0.5, 1000);
  const double hc = pinning_critical_point(poly);
  CHECK_THAT(hc, WithinAbs(0.0, 1e-12));
  CHECK(pinning_free_energy_homogeneous(poly, hc) == 0.0);
  double prev = 0.0;
  for (double h : {0.01, 0.1, 0.5, 1.0}) {
    const double f = pinning_free_energy_homogeneous(poly, h);
    CHECK(f > prev);
    CHECK(f < h);  // F(h) <= h since sum_s p(s) e^{-Fs} <= e^{-F}
    prev = f;
  }

  CHECK_THAT(pinning_contact_fraction_u(g), WithinAbs(0.5, 1e-12));
  CHECK_THAT(pinning_contact_fraction_u(WaitingLaw{{1.0}, 0.0}), WithinAbs(1.0, 1e-15));
  CHECK_THAT(pinning_contact_fraction_u(WaitingLaw{{0.0, 1.0}, 0.0}), WithinAbs(0.5, 1e-15));

  CHECK(polynomial_truncation_mass(0.0, 100) == 1.0);
  CHECK_THAT(polynomial_truncation_mass(1.0, 1),
             WithinAbs(1.0 - 1.0 / (M_PI * M_PI / 6.0), 1e-12));
}

TEST_CASE("Gauss-Hermite disorder moments") {
  const auto spec = gauss_hermite_disorder(21, "omega");
  CHECK(spec.kind == EnvKind::IidSequence);
  CHECK(spec.states.size() == 21);
  double m0 = 0, m1 = 0, m2 = 0, m4 = 0, m6 = 0;
  for (std::size_t i = 0; i < spec.states.size(); ++i) {
    const double x = spec.states[i].params[0];
    const double w = spec.letter_law[i];
    m0 += w;
    m1 += w * x;
    m2 += w * x * x;
    m4 += w * std::pow(x, 4);
    m6 += w * std::pow(x, 6);
  }
  CHECK_THAT(m0, WithinAbs(1.0, 1e-13));
  CHECK_THAT(m1, WithinAbs(0.0, 1e-13));
  CHECK_THAT(m2, WithinAbs(1.0, 1e-12));
  CHECK_THAT(m4, WithinAbs(3.0, 1e-11));
  CHECK_THAT(m6, WithinAbs(15.0, 1e-10));
  CHECK(spec.states[0].label == "gh0");
}
