#include <catch_amalgamated.hpp>

#include <cmath>

#include "qldp/error.hpp"
#include "qldp/example_models.hpp"
#include "qldp/model.hpp"
#include "support.hpp"

using namespace qldp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const auto kOne = test::periodic({"x"});

}  // namespace

TEST_CASE("waiting law validation") {
  CHECK_NOTHROW(WaitingLaw{{0.6, 0.4}, 0.0}.validate());
  CHECK_NOTHROW(WaitingLaw{{0.9}, 0.1}.validate());
  CHECK_THROWS_AS((WaitingLaw{{0.6, 0.3}, 0.0}.validate()), Error);
  CHECK_THROWS_AS((WaitingLaw{{1.2, -0.2}, 0.0}.validate()), Error);
  CHECK_THROWS_AS((WaitingLaw{{}, 1.0}.validate()), Error);
}

TEST_CASE("reward law rejects dimension mismatches and mass defects") {
  std::map<std::string, LetterTable> t;
  t.emplace("*", make_letter_table(WaitingLaw{{1.0}, 0.0}, {{{{1.0}, 0.5}}}));
  CHECK_THROWS_AS(TableModel(t, 1), Error);
  std::map<std::string, LetterTable> t2;
  t2.emplace("*", make_letter_table(WaitingLaw{{1.0}, 0.0}, {{{{1.0, 2.0}, 1.0}}}));
  CHECK_THROWS_AS(TableModel(t2, 1), Error);
}

TEST_CASE("gibbs weights") {
  const auto traj = realize(kOne, 0, 10);
  const auto m = test::contact_06();
  const double zero[1] = {0.0};
  const double ln2[1] = {std::log(2.0)};
  CHECK(gibbs_weight(m, traj.view(), 0, zero, 1) == 0.6);
  CHECK_THAT(gibbs_weight(m, traj.view(), 0, ln2, 2), WithinRel(0.8, 1e-15));
  const auto pinned = test::homogeneous({0.6, 0.4}, 0.0, {}, {1.0, 1.0});
  CHECK_THAT(gibbs_weight(pinned, traj.view(), 0, zero, 1), WithinRel(0.6 * std::exp(1.0), 1e-15));
  const double two[2] = {0.0, 0.0};
  CHECK_THROWS_AS(gibbs_weight(m, traj.view(), 0, two, 1), Error);
}

TEST_CASE("gibbs weight with v = 0 at phi = 0 is p(s); log-convex in phi") {
  const auto traj = realize(kOne, 0, 10);
  const auto m = test::homogeneous({0.2, 0.5, 0.3}, 0.0, {-1.0, 0.5, 2.0});
  const double zero[1] = {0.0};
  for (int s = 1; s <= 3; ++s) CHECK(gibbs_weight(m, traj.view(), 0, zero, s) == WaitingLaw{{0.2, 0.5, 0.3}}.prob(s));

  std::map<std::string, LetterTable> t;
  t.emplace("*", make_letter_table(WaitingLaw{{0.5, 0.5}, 0.0}, {{{{-1.0}, 0.3}, {{2.0}, 0.7}}, {{{0.5}, 1.0}}}));
  const TableModel mix(std::move(t), 1);
  for (double a = -2.0; a <= 2.0; a += 0.5) {
    for (double b = a + 0.25; b <= 2.0; b += 0.75) {
      const double pa[1] = {a}, pb[1] = {b}, pm[1] = {0.5 * (a + b)};
      const double la = std::log(gibbs_weight(mix, traj.view(), 0, pa, 1));
      const double lb = std::log(gibbs_weight(mix, traj.view(), 0, pb, 1));
      const double lm = std::log(gibbs_weight(mix, traj.view(), 0, pm, 1));
      CHECK(lm <= 0.5 * (la + lb) + 1e-12);
    }
  }
}

TEST_CASE("tail probabilities") {
  const auto traj = realize(kOne, 0, 10);
  const auto m = test::contact_06();
  CHECK(tail_probability(m, traj.view(), 0, 0) == 1.0);
  CHECK_THAT(tail_probability(m, traj.view(), 0, 1), WithinAbs(0.4, 1e-15));
  CHECK(tail_probability(m, traj.view(), 0, 2) == 0.0);
  CHECK(tail_probability(m, traj.view(), 0, 7) == 0.0);
  const auto defective = test::homogeneous({0.9}, 0.1);
  for (std::size_t s = 1; s < 6; ++s) CHECK_THAT(tail_probability(defective, traj.view(), 0, s), WithinAbs(0.1, 1e-15));
  CHECK_THROWS_AS(tail_probability(m, traj.view(), 11, 1), Error);

  const auto m3 = test::homogeneous({0.2, 0.5, 0.3});
  for (std::size_t s = 0; s < 3; ++s) {
    CHECK_THAT(tail_probability(m3, traj.view(), 0, s) - tail_probability(m3, traj.view(), 0, s + 1),
               WithinAbs(WaitingLaw{{0.2, 0.5, 0.3}}.prob(static_cast<int>(s) + 1), 1e-15));
  }
}

TEST_CASE("compound poisson tail reads the letter one ahead") {
  const auto spec = test::periodic({"a", "b"}, {"rho"}, {{0.3}, {0.6}});
  const auto traj = realize(spec, 0, 20);
  const examples::CompoundPoissonModel cp(*spec, {});
  CHECK_THAT(tail_probability(cp, traj.view(), 0, 1), WithinAbs(1.0 - 0.6, 1e-15));
  CHECK_THAT(tail_probability(cp, traj.view(), 1, 1), WithinAbs(1.0 - 0.3, 1e-15));
}

TEST_CASE("diagnostics: aperiodicity, bounds, properness") {
  const auto traj = realize(kOne, 0, 20);
  const auto even = test::homogeneous({0.0, 0.5, 0.0, 0.5});
  const auto d = validate(even, traj.view(), 10);
  CHECK(d.support_gcd == 2);
  CHECK_FALSE(d.aperiodic);
  bool flagged = false;
  for (const auto& m : d.messages) flagged = flagged || m.find("aperiodicity condition violated") != std::string::npos;
  CHECK(flagged);

  const auto one = test::homogeneous({1.0});
  const auto d1 = validate(one, traj.view(), 10);
  CHECK(d1.support_gcd == 1);
  CHECK(d1.aperiodic);
  CHECK(d1.proper);

  const auto d2 = validate(test::homogeneous({0.9}, 0.1), traj.view(), 10);
  CHECK_FALSE(d2.proper);
  CHECK_THAT(d2.max_p_inf, WithinAbs(0.1, 1e-15));

  const auto disorder = test::periodic({"lo", "hi"}, {"omega"}, {{-1.0}, {1.0}});
  const auto dtraj = realize(disorder, 0, 200);
  examples::PinningSpec ps;
  ps.h = 0.0;
  ps.beta = 1.0;
  ps.s_max = 50;
  const examples::PinningModel pin(ps);
  const auto dp = validate(pin, dtraj.view(), 100);
  CHECK(dp.eta == 0.0);
  CHECK_THAT(dp.potential_abs_bound, WithinAbs(1.0, 1e-15));
  CHECK(dp.aperiodic);
}
