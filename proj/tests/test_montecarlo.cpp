#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qldp/montecarlo.hpp"
#include "qldp/partition.hpp"
#include "support.hpp"

using namespace qldp;
using Catch::Matchers::WithinAbs;

namespace {

const auto kOne = test::periodic({"x"});

bool same(const BallMassEstimate& a, const BallMassEstimate& b) {
  return a.hits == b.hits && a.n_samples == b.n_samples &&
         (a.log_mass_per_t == b.log_mass_per_t || (std::isnan(a.log_mass_per_t) && std::isnan(b.log_mass_per_t))) &&
         (a.std_error == b.std_error || (std::isinf(a.std_error) && std::isinf(b.std_error)));
}

}  // namespace

TEST_CASE("deterministic waiting times") {
  const auto traj = realize(kOne, 0, 10);
  const auto m = test::homogeneous({1.0}, 0.0, {1.0}, {0.3});
  const auto p = simulate_trajectory(m, traj.view(), 5, 9, 2);
  CHECK(p.n_renewals == 5);
  CHECK(p.W == std::vector<double>{5.0});
  CHECK_THAT(p.H, WithinAbs(1.5, 1e-15));
  CHECK(p.ends_at_t());
  CHECK_FALSE(p.censored);
  CHECK(p.renewal_times == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK(p.seed == 9);
  CHECK(p.stream == 2);

  const auto two = test::homogeneous({0.0, 1.0});
  const auto q = simulate_trajectory(two, traj.view(), 5, 1);
  CHECK(q.n_renewals == 2);
  CHECK_FALSE(q.ends_at_t());
  CHECK(q.censored);
}

TEST_CASE("same seed and stream reproduce the path") {
  const auto traj = realize(kOne, 0, 500);
  const auto m = test::contact_06();
  const auto a = simulate_trajectory(m, traj.view(), 500, 42, 7);
  const auto b = simulate_trajectory(m, traj.view(), 500, 42, 7);
  const auto c = simulate_trajectory(m, traj.view(), 500, 42, 8);
  CHECK(a.waits == b.waits);
  CHECK(a.waits != c.waits);
}

TEST_CASE("renewal rate matches the inverse mean waiting time") {
  const auto traj = realize(kOne, 0, 400);
  const auto m = test::contact_06();
  const int n = 2000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto p = simulate_trajectory(m, traj.view(), 400, 3, static_cast<std::uint64_t>(i));
    const double r = static_cast<double>(p.n_renewals) / 400.0;
    sum += r;
    sum2 += r * r;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
  CHECK(std::abs(mean - 1.0 / 1.4) < 4.0 * se + 2.0 / 400.0);
}

TEST_CASE("Monte Carlo ball mass agrees with the exact lattice measure") {
  const auto traj = realize(kOne, 0, 40);
  const auto m = test::homogeneous({0.6, 0.4}, 0.0, {}, {0.1, -0.2});
  const double step[1] = {1.0};
  const std::size_t t = 20;
  const auto exact = constrained_measure(m, traj.view(), t, step);
  const std::vector<std::vector<double>> ws{{0.75}, {0.6}, {0.9}};
  const auto rows = empirical_rate_scan(m, traj.view(), t, ws, 0.05, 20000, 5, MeasureKind::Constrained);
  for (const auto& r : rows) {
    const double want = exact.log_ball_mass(r.w, 0.05) / static_cast<double>(t);
    REQUIRE(r.estimate.hits > 100);
    CHECK(std::abs(r.estimate.log_mass_per_t - want) < 4.0 * r.estimate.std_error);
  }
}

TEST_CASE("free estimates dominate constrained ones") {
  const auto traj = realize(kOne, 0, 100);
  const auto m = test::contact_06();
  const std::vector<std::vector<double>> ws{{0.6}, {0.7}, {0.8}};
  const auto c = empirical_rate_scan(m, traj.view(), 100, ws, 0.05, 3000, 1, MeasureKind::Constrained);
  const auto f = empirical_rate_scan(m, traj.view(), 100, ws, 0.05, 3000, 1, MeasureKind::Free);
  for (std::size_t k = 0; k < ws.size(); ++k) {
    CHECK(f[k].estimate.hits >= c[k].estimate.hits);
    CHECK(f[k].estimate.log_mass_per_t >= c[k].estimate.log_mass_per_t);
  }
}

TEST_CASE("balls without hits are reported, not hidden") {
  const auto traj = realize(kOne, 0, 100);
  const auto m = test::contact_06();
  const std::vector<std::vector<double>> ws{{5.0}};
  const auto r = empirical_rate_scan(m, traj.view(), 50, ws, 0.05, 200, 1, MeasureKind::Constrained);
  CHECK(r[0].estimate.hits == 0);
  CHECK(r[0].estimate.n_samples == 200);
  CHECK(r[0].estimate.log_mass_per_t == kNegInf);
}

TEST_CASE("results do not depend on the thread count") {
  const auto traj = realize(kOne, 0, 200);
  const auto m = test::contact_06();
  const std::vector<std::vector<double>> ws{{0.6}, {0.7}, {0.75}, {0.85}};
  McOptions one{8, 1}, four{8, 4}, three{8, 3};
  const auto a = empirical_rate_scan(m, traj.view(), 200, ws, 0.05, 5000, 77, MeasureKind::Constrained, one);
  const auto b = empirical_rate_scan(m, traj.view(), 200, ws, 0.05, 5000, 77, MeasureKind::Constrained, four);
  const auto c = empirical_rate_scan(m, traj.view(), 200, ws, 0.05, 5000, 77, MeasureKind::Constrained, three);
  McOptions other{3, 4};
  const auto d = empirical_rate_scan(m, traj.view(), 200, ws, 0.05, 5000, 77, MeasureKind::Constrained, other);
  for (std::size_t k = 0; k < ws.size(); ++k) {
    CHECK(same(a[k].estimate, b[k].estimate));
    CHECK(same(a[k].estimate, c[k].estimate));
    // a different batch partition only reorders the sums
    CHECK(d[k].estimate.hits == a[k].estimate.hits);
    CHECK_THAT(d[k].estimate.log_mass_per_t, WithinAbs(a[k].estimate.log_mass_per_t, 1e-13));
  }
}

TEST_CASE("invalid Monte Carlo requests") {
  const auto traj = realize(kOne, 0, 50);
  const auto m = test::contact_06();
  const std::vector<std::vector<double>> ws{{0.5}};
  CHECK(test::error_code_of([&] { empirical_rate_scan(m, traj.view(), 60, ws, 0.05, 10, 1, MeasureKind::Free); }) ==
        ErrorCode::OutOfHorizon);
  CHECK(test::error_code_of([&] { empirical_rate_scan(m, traj.view(), 10, ws, 0.0, 10, 1, MeasureKind::Free); }) ==
        ErrorCode::InvalidConfig);
  const std::vector<std::vector<double>> bad{{0.5, 0.5}};
  CHECK(test::error_code_of([&] { empirical_rate_scan(m, traj.view(), 10, bad, 0.05, 10, 1, MeasureKind::Free); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("scan csv") {
  const auto traj = realize(kOne, 0, 50);
  const auto m = test::contact_06();
  const std::vector<std::vector<double>> ws{{0.7}, {3.0}};
  const auto rows = empirical_rate_scan(m, traj.view(), 20, ws, 0.05, 100, 4, MeasureKind::Constrained);
  const auto path = std::filesystem::temp_directory_path() / "qldp_scan.csv";
  write_scan_csv(rows, 20, 4, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "w_1,log_mass_per_t,std_error,hits,n_samples,t,seed");
  int n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == 2);
}
