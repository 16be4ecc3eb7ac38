#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "qldp/example_models.hpp"
#include "qldp/logspace.hpp"
#include "qldp/partition.hpp"
#include "qldp/rng.hpp"
#include "qldp/variational.hpp"
#include "support.hpp"

using namespace qldp;
using Catch::Matchers::WithinAbs;

namespace {

LogMatrix log_of(const Eigen::MatrixXd& m) {
  LogMatrix a;
  a.n = static_cast<std::size_t>(m.rows());
  a.data.resize(a.n * a.n);
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t j = 0; j < a.n; ++j) a(i, j) = m(i, j) > 0.0 ? std::log(m(i, j)) : kNegInf;
  }
  return a;
}

double eigen_log_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  double r = 0.0;
  for (const auto& ev : es.eigenvalues()) r = std::max(r, std::abs(ev));
  return std::log(r);
}

// Two letters with different waiting laws and contact rewards.
TableModel two_letter_model() {
  std::map<std::string, LetterTable> t;
  const std::vector<std::vector<RewardAtom>> one{{{{1.0}, 1.0}}, {{{1.0}, 1.0}}, {{{1.0}, 1.0}}};
  t.emplace("A", make_letter_table(WaitingLaw{{0.5, 0.3, 0.2}, 0.0}, one, {0.1, -0.2, 0.0}));
  t.emplace("B", make_letter_table(WaitingLaw{{0.1, 0.6, 0.2}, 0.1}, one, {-0.3, 0.2, 0.4}));
  return TableModel(std::move(t), 1);
}

}  // namespace

TEST_CASE("upsilon on the one-letter 0.6/0.4 model") {
  const auto env = test::periodic({"x"});
  const auto m = test::contact_06();
  const double phi[1] = {0.0};
  CHECK_THAT(upsilon(m, env, phi, 0.0).upsilon, WithinAbs(0.0, 1e-12));
  CHECK_THAT(upsilon(m, env, phi, 0.1).upsilon, WithinAbs(std::log(0.6 * std::exp(-0.1) + 0.4 * std::exp(-0.2)), 1e-10));
  CHECK_THAT(perron_upsilon(m, env, phi, 0.1), WithinAbs(std::log(0.6 * std::exp(-0.1) + 0.4 * std::exp(-0.2)), 1e-12));
}

TEST_CASE("Perron radius matches a dense eigenvalue oracle") {
  for (std::uint64_t k = 0; k < 30; ++k) {
    CounterRng rng(2024, k);
    const int n = 2 + static_cast<int>(rng.uniform() * 5.0);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    }
    // keep it irreducible: a cycle through every state
    for (int i = 0; i < n; ++i) m(i, (i + 1) % n) += 0.1;
    const auto a = log_of(m);
    CHECK_THAT(perron_log_radius(a).log_radius, WithinAbs(eigen_log_radius(m), 1e-9));
    const auto sol = solve_corrector(a, 0.0);
    CHECK_THAT(sol.upsilon, WithinAbs(eigen_log_radius(m), 1e-8));
    CHECK(corrector_objective(a, sol.R) >= sol.upsilon - 1e-12);
  }
}

TEST_CASE("reducible matrices take the largest block") {
  Eigen::MatrixXd d(2, 2);
  d << 0.5, 0.0, 0.0, 2.0;
  const auto p = perron_log_radius(log_of(d));
  CHECK(p.reducible);
  CHECK_THAT(p.log_radius, WithinAbs(std::log(2.0), 1e-12));

  Eigen::MatrixXd tri(3, 3);
  tri << 0.2, 1.0, 0.0, 0.0, 0.7, 0.3, 0.0, 0.0, 0.4;
  CHECK_THAT(perron_log_radius(log_of(tri)).log_radius, WithinAbs(std::log(0.7), 1e-12));

  // period 2 permutation: radius 1 though power iteration alone oscillates
  Eigen::MatrixXd swap(2, 2);
  swap << 0.0, 1.0, 1.0, 0.0;
  CHECK_THAT(perron_log_radius(log_of(swap)).log_radius, WithinAbs(0.0, 1e-12));
  CHECK_THAT(solve_corrector(log_of(swap), 0.0).upsilon, WithinAbs(0.0, 1e-10));
}

TEST_CASE("corrector solver agrees with the Perron oracle on model kernels") {
  const auto env = test::periodic({"A", "B", "B", "A", "B"});
  const auto m = two_letter_model();
  for (double phi0 : {-1.0, 0.0, 0.8}) {
    for (double zeta : {-0.5, 0.0, 0.4}) {
      const double phi[1] = {phi0};
      CHECK_THAT(upsilon(m, env, phi, zeta).upsilon, WithinAbs(perron_upsilon(m, env, phi, zeta), 1e-9));
    }
  }
}

TEST_CASE("free energy basics") {
  const auto env = test::periodic({"A", "B"});
  const auto m = two_letter_model();
  const double zero[1] = {0.0};
  // weights include v, so z(0) is not 0 here; with v = 0 it is
  const auto plain = test::contact_06();
  CHECK_THAT(free_energy_variational(plain, test::periodic({"x"}), zero).z, WithinAbs(0.0, 1e-10));

  double prev = -INFINITY;
  for (double p0 = -2.0; p0 <= 2.0; p0 += 0.25) {
    const double phi[1] = {p0};
    const double z = free_energy_variational(m, env, phi).z;
    CHECK(z > prev);
    prev = z;
  }
}

TEST_CASE("Perron and corrector routes give the same z") {
  const auto env = test::periodic({"A", "B", "B"});
  const auto m = two_letter_model();
  FreeEnergyOptions perron;
  perron.perron = true;
  for (double p0 : {-1.5, 0.0, 1.0}) {
    const double phi[1] = {p0};
    CHECK_THAT(free_energy_variational(m, env, phi).z, WithinAbs(free_energy_variational(m, env, phi, perron).z, 1e-9));
  }
}

TEST_CASE("homogeneous pinning matches the closed form") {
  const auto law = examples::geometric_waiting_law(0.5, 60);
  const auto env = test::periodic({"x"}, {"omega"}, {{0.0}});
  for (double h : {0.05, 0.3, 1.0, 2.0}) {
    examples::PinningSpec s;
    s.h = h;
    s.waiting = law;
    s.s_max = 60;
    const examples::PinningModel m(s);
    const double zero[1] = {0.0};
    CHECK_THAT(free_energy_variational(m, env, zero).z,
               WithinAbs(examples::pinning_free_energy_homogeneous(law, h), 1e-5));
  }
}

TEST_CASE("cycle representation does not matter") {
  const auto m = two_letter_model();
  const double phi[1] = {0.3};
  const double base = free_energy_variational(m, test::periodic({"A", "B"}), phi).z;
  CHECK_THAT(free_energy_variational(m, test::periodic({"A", "B", "A", "B"}), phi).z, WithinAbs(base, 1e-9));
  CHECK_THAT(free_energy_variational(m, test::periodic({"B", "A"}), phi).z, WithinAbs(base, 1e-9));
  const double abb = free_energy_variational(m, test::periodic({"A", "B", "B"}), phi).z;
  CHECK_THAT(free_energy_variational(m, test::periodic({"B", "B", "A"}), phi).z, WithinAbs(abb, 1e-9));
}

TEST_CASE("non-periodic environments are rejected") {
  const auto iid = std::make_shared<const EnvironmentSpec>(EnvironmentSpec::iid({}, {{"A", {}}, {"B", {}}}, {0.5, 0.5}));
  const auto m = two_letter_model();
  const double phi[1] = {0.0};
  CHECK(test::error_code_of([&] { free_energy_variational(m, iid, phi); }) == ErrorCode::NotPeriodic);
}

TEST_CASE("property: z is midpoint convex") {
  const auto env = test::periodic({"A", "B", "B"});
  const auto m = two_letter_model();
  for (double a = -2.0; a <= 2.0; a += 0.5) {
    for (double b = a + 0.5; b <= 2.0; b += 0.5) {
      const double pa[1] = {a}, pb[1] = {b}, pm[1] = {0.5 * (a + b)};
      const double za = free_energy_variational(m, env, pa).z;
      const double zb = free_energy_variational(m, env, pb).z;
      CHECK(free_energy_variational(m, env, pm).z <= 0.5 * (za + zb) + 1e-9);
    }
  }
}

TEST_CASE("Kingman estimates approach the variational value") {
  const auto spec = test::periodic({"A", "B", "B"});
  const auto m = two_letter_model();
  const auto traj = realize(spec, 0, 1600);
  const double phi[1] = {0.4};
  const double z = free_energy_variational(m, spec, phi).z;
  const auto table = constrained_partition(m, traj.view(), 1600, phi);
  double prev = INFINITY;
  for (std::size_t t : {25, 100, 400, 1600}) {
    const double gap = std::abs(table.log_z(t) / static_cast<double>(t) - z);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 5e-3);
}
