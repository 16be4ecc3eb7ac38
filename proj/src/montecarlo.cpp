#include "qldp/montecarlo.hpp"

#include <cmath>
#include <limits>

#include "qldp/csv.hpp"
#include "qldp/error.hpp"
#include "qldp/kernels.hpp"
#include "qldp/partition.hpp"
#include "qldp/rng.hpp"

namespace qldp {

namespace {

// Walks one path; W and H are accumulated in place, the full record only
// when `path` is given.
void walk(StepLawSource& source, CounterRng& rng, std::vector<double>& W, double& H, std::size_t& last_renewal,
          bool& censored, RenewalPath* path) {
  const RenewalModel& model = source.model();
  const std::size_t t = source.t();
  const std::size_t d = static_cast<std::size_t>(model.dim());
  W.assign(d, 0.0);
  H = 0.0;
  censored = false;
  std::size_t u = 0;
  while (u < t) {
    const StepLaw& law = source.at(u);
    const int reach = static_cast<int>(std::min<std::size_t>(t - u, static_cast<std::size_t>(model.s_max())));
    const double u_wait = rng.uniform();
    const double u_reward = rng.uniform();
    double cum = 0.0;
    int s = 0;
    for (int k = 1; k <= reach; ++k) {
      cum += std::exp(law.log_prob[k - 1]);
      if (u_wait < cum) {
        s = k;
        break;
      }
    }
    if (s == 0) {
      censored = true;
      break;
    }
    const std::size_t atoms = law.reward.atom_count(s);
    std::size_t pick = 0;
    if (atoms > 1) {
      double acc = 0.0;
      pick = atoms - 1;
      for (std::size_t k = 0; k < atoms; ++k) {
        acc += law.reward.mass(s, k);
        if (u_reward < acc) {
          pick = k;
          break;
        }
      }
    }
    const auto x = law.reward.point(s, pick);
    for (std::size_t j = 0; j < d; ++j) W[j] += x[j];
    H += law.potential[s - 1];
    u += static_cast<std::size_t>(s);
    if (path) {
      path->waits.push_back(s);
      path->renewal_times.push_back(u);
      path->rewards.insert(path->rewards.end(), x.begin(), x.end());
    }
  }
  last_renewal = u;
}

bool in_ball(const std::vector<double>& W, std::size_t t, std::span<const double> w, double delta) {
  double dist2 = 0.0;
  const double scale = static_cast<double>(t);
  for (std::size_t j = 0; j < W.size(); ++j) {
    const double x = W[j] / scale - w[j];
    dist2 += x * x;
  }
  return std::sqrt(dist2) < delta;
}

}  // namespace

RenewalPath simulate_trajectory(const RenewalModel& model, EnvironmentView env, std::size_t t, std::uint64_t seed,
                                std::uint64_t stream) {
  StepLawSource source(model, env, t);
  CounterRng rng(seed, stream);
  RenewalPath path;
  path.t = t;
  path.seed = seed;
  path.stream = stream;
  path.renewal_times.push_back(0);
  std::size_t last = 0;
  walk(source, rng, path.W, path.H, last, path.censored, &path);
  path.n_renewals = path.waits.size();
  return path;
}

void BallAccumulator::merge(const BallAccumulator& other) {
  sum.merge(other.sum);
  sum_sq.merge(other.sum_sq);
  hits += other.hits;
  n += other.n;
}

BallMassEstimate BallAccumulator::estimate(std::size_t t) const {
  BallMassEstimate e;
  e.hits = hits;
  e.n_samples = n;
  if (hits == 0 || n == 0) {
    e.log_mass_per_t = kNegInf;
    e.std_error = std::numeric_limits<double>::infinity();
    return e;
  }
  const double ln = std::log(static_cast<double>(n));
  const double log_mean = sum.value() - ln;
  const double scale = static_cast<double>(std::max<std::size_t>(t, 1));
  e.log_mass_per_t = log_mean / scale;
  if (n > 1) {
    // Relative variance of the weights: n * S2 / S1^2 - 1.
    const double r = std::exp(sum_sq.value() + ln - 2.0 * sum.value());
    e.std_error = std::sqrt(std::max(r - 1.0, 0.0) / static_cast<double>(n - 1)) / scale;
  }
  return e;
}

std::vector<BallAccumulator> simulate_batch(StepLawSource& source, std::span<const std::vector<double>> w_grid,
                                            double delta, MeasureKind kind, std::uint64_t seed, std::size_t first,
                                            std::size_t last) {
  const std::size_t t = source.t();
  std::vector<BallAccumulator> acc(w_grid.size());
  std::vector<double> W;
  double H = 0.0;
  std::size_t end = 0;
  bool censored = false;
  for (std::size_t i = first; i < last; ++i) {
    CounterRng rng(seed, i);
    walk(source, rng, W, H, end, censored, nullptr);
    const bool admissible = kind == MeasureKind::Free || end == t;
    for (std::size_t k = 0; k < w_grid.size(); ++k) {
      BallAccumulator& a = acc[k];
      ++a.n;
      if (!admissible || !in_ball(W, t, w_grid[k], delta)) continue;
      ++a.hits;
      a.sum.add(H);
      a.sum_sq.add(2.0 * H);
    }
  }
  return acc;
}

std::vector<ScanRow> empirical_rate_scan(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                         const std::vector<std::vector<double>>& w_grid, double delta,
                                         std::size_t n_samples, std::uint64_t seed, MeasureKind kind,
                                         const McOptions& options) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidConfig, "delta must be positive");
  if (n_samples < 1) throw Error(ErrorCode::InvalidConfig, "n_samples must be >= 1");
  if (t > env.horizon()) {
    throw Error(ErrorCode::OutOfHorizon, "t=" + std::to_string(t) + " exceeds horizon " + std::to_string(env.horizon()));
  }
  for (const auto& w : w_grid) {
    if (w.size() != static_cast<std::size_t>(model.dim())) {
      throw Error(ErrorCode::DimensionMismatch, "ball center has the wrong dimension");
    }
  }
  const auto acc = kernels::parallel::mc_scan(model, env, t, w_grid, delta, kind, seed, n_samples,
                                              options.batches, kernels::resolve_threads(options.threads));
  std::vector<ScanRow> rows;
  for (std::size_t k = 0; k < w_grid.size(); ++k) rows.push_back({w_grid[k], acc[k].estimate(t)});
  return rows;
}

BallMassEstimate empirical_ball_mass(const RenewalModel& model, EnvironmentView env, std::size_t t,
                                     std::span<const double> w, double delta, std::size_t n_samples,
                                     std::uint64_t seed, MeasureKind kind, const McOptions& options) {
  const std::vector<std::vector<double>> grid{std::vector<double>(w.begin(), w.end())};
  return empirical_rate_scan(model, env, t, grid, delta, n_samples, seed, kind, options).front().estimate;
}

void write_scan_csv(const std::vector<ScanRow>& rows, std::size_t t, std::uint64_t seed,
                    const std::filesystem::path& path) {
  CsvWriter csv(path);
  const std::size_t d = rows.empty() ? 1 : rows.front().w.size();
  std::vector<std::string> header;
  for (std::size_t j = 0; j < d; ++j) header.push_back("w_" + std::to_string(j + 1));
  header.insert(header.end(), {"log_mass_per_t", "std_error", "hits", "n_samples", "t", "seed"});
  csv.header(header);
  for (const auto& row : rows) {
    csv.row_begin();
    for (double x : row.w) csv.field(x);
    csv.field(row.estimate.log_mass_per_t);
    csv.field(row.estimate.std_error);
    csv.field(static_cast<long long>(row.estimate.hits));
    csv.field(static_cast<long long>(row.estimate.n_samples));
    csv.field(static_cast<long long>(t));
    csv.field(std::to_string(seed));
    csv.row_end();
  }
}

}  // namespace qldp
