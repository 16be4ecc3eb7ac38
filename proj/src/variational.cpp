#include "qldp/variational.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "qldp/csv.hpp"
#include "qldp/error.hpp"
#include "qldp/logspace.hpp"

namespace qldp {

namespace {

const EnvironmentSpec& require_periodic(const std::shared_ptr<const EnvironmentSpec>& spec) {
  if (!spec) throw Error(ErrorCode::InvalidSpec, "missing environment spec");
  if (spec->kind != EnvKind::Periodic) {
    throw Error(ErrorCode::NotPeriodic, "the corrector formula is evaluated on periodic environments only");
  }
  spec->validate();
  return *spec;
}

// f_i(R) = log sum_j A_ij e^{R_j} - R_i, plus the softmax weights of row i.
double row_value(const LogMatrix& a, std::span<const double> R, std::size_t i, std::vector<double>* pi) {
  const std::size_t n = a.n;
  double m = kNegInf;
  for (std::size_t j = 0; j < n; ++j) m = std::max(m, a(i, j) + R[j]);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double e = a(i, j) == kNegInf ? 0.0 : std::exp(a(i, j) + R[j] - m);
    if (pi) (*pi)[j] = e;
    s += e;
  }
  if (pi) {
    for (auto& p : *pi) p /= s;
  }
  return m + std::log(s) - R[i];
}

double irreducible_log_radius(const LogMatrix& a, const std::vector<std::size_t>& block, int* iterations) {
  const std::size_t k = block.size();
  double m = kNegInf;
  for (std::size_t p : block) {
    for (std::size_t q : block) m = std::max(m, a(p, q));
  }
  if (m == kNegInf) return kNegInf;
  Eigen::MatrixXd b(k, k);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = 0; q < k; ++q) {
      const double v = a(block[p], block[q]);
      b(p, q) = v == kNegInf ? 0.0 : std::exp(v - m);
    }
  }
  if (k == 1) return b(0, 0) > 0.0 ? std::log(b(0, 0)) + m : kNegInf;

  const Eigen::VectorXd rows = b.rowwise().sum();
  const double shift = 0.5 * (rows.minCoeff() + rows.maxCoeff());
  Eigen::VectorXd x = Eigen::VectorXd::Ones(k);
  double lo = 0.0;
  double hi = 0.0;
  int it = 0;
  for (; it < 200000; ++it) {
    const Eigen::VectorXd y = b * x;
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double r = y(p) / x(p);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    if (hi - lo <= 1e-14 * hi) break;
    x = (y + shift * x) / (y + shift * x).maxCoeff();
  }
  if (iterations) *iterations += it;
  return std::log(0.5 * (lo + hi)) + m;
}

// Strongly connected components by mutual reachability; n is small here.
std::vector<std::vector<std::size_t>> components(const LogMatrix& a) {
  const std::size_t n = a.n;
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> stack{s};
    reach[s][s] = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        if (a(u, v) != kNegInf && !reach[s][v]) {
          reach[s][v] = 1;
          stack.push_back(v);
        }
      }
    }
  }
  std::vector<int> label(n, -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    label[i] = static_cast<int>(out.size());
    out.push_back({i});
    for (std::size_t j = i + 1; j < n; ++j) {
      if (label[j] < 0 && reach[i][j] && reach[j][i]) {
        label[j] = label[i];
        out.back().push_back(j);
      }
    }
  }
  return out;
}

// Newton iterations on f_i(R) = t for all i, R_0 = 0 fixed. Keeps the best G
// seen together with its R.
int newton_polish(const LogMatrix& a, std::vector<double> R, double& best, std::vector<double>& best_R,
                  int max_iter) {
  const std::size_t n = a.n;
  std::vector<double> f(n);
  std::vector<std::vector<double>> pi(n, std::vector<double>(n));
  auto evaluate = [&](const std::vector<double>& r) {
    double g = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = row_value(a, r, i, &pi[i]);
      g = std::max(g, f[i]);
    }
    return g;
  };
  double g = evaluate(R);
  double t = g;
  auto residual = [&](double tt) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(f[i] - tt));
    return r;
  };
  double res = residual(t);
  int it = 0;
  for (; it < max_iter && res > 1e-15 * std::max(1.0, std::abs(t)); ++it) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 1; j < n; ++j) jac(i, j - 1) = pi[i][j] - (i == j ? 1.0 : 0.0);
      jac(i, n - 1) = -1.0;
      rhs(i) = -(f[i] - t);
    }
    const Eigen::VectorXd step = jac.fullPivLu().solve(rhs);
    if (!step.allFinite()) break;
    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> trial(n);
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      trial[0] = R[0];
      for (std::size_t j = 1; j < n; ++j) trial[j] = R[j] + alpha * step(j - 1);
      const double tt = t + alpha * step(n - 1);
      const double gt = evaluate(trial);
      const double rt = residual(tt);
      if (std::isfinite(gt) && rt < res * (1.0 - 1e-4 * alpha)) {
        R = trial;
        t = tt;
        res = rt;
        if (gt <= best) {
          best = gt;
          best_R = R;
        }
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return it;
}

}  // namespace

PeriodicKernel::PeriodicKernel(const RenewalModel& model, std::shared_ptr<const EnvironmentSpec> periodic_spec,
                               std::span<const double> phi)
    : n_(require_periodic(periodic_spec).period), s_max_(model.s_max()) {
  if (phi.size() != static_cast<std::size_t>(model.dim())) {
    throw Error(ErrorCode::DimensionMismatch, "phi dimension does not match the model");
  }
  const auto traj = realize(std::move(periodic_spec), 0, n_ + static_cast<std::size_t>(s_max_));
  log_w_.resize(n_ * static_cast<std::size_t>(s_max_));
  for (std::size_t i = 0; i < n_; ++i) {
    const StepLaw law = model.step_law(traj.view(), i, s_max_);
    for (int s = 1; s <= s_max_; ++s) log_w_[i * s_max_ + (s - 1)] = log_gibbs_weight(law, phi, s);
  }
}

LogMatrix PeriodicKernel::log_transfer(double zeta) const {
  LogMatrix a{n_, std::vector<double>(n_ * n_, kNegInf)};
  std::vector<LogSumAccumulator> acc(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (auto& x : acc) x = LogSumAccumulator{};
    for (int s = 1; s <= s_max_; ++s) {
      const double w = log_weight(i, s);
      if (w != kNegInf) acc[(i + s) % n_].add(w - zeta * s);
    }
    for (std::size_t j = 0; j < n_; ++j) a(i, j) = acc[j].value();
  }
  return a;
}

std::pair<double, double> PeriodicKernel::weight_range() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = kNegInf;
  for (std::size_t i = 0; i < n_; ++i) {
    LogSumAccumulator row;
    for (int s = 1; s <= s_max_; ++s) {
      const double w = log_weight(i, s);
      if (w == kNegInf) continue;
      lo = std::min(lo, w);
      row.add(w);
    }
    hi = std::max(hi, row.value());
  }
  return {lo, hi};
}

double corrector_objective(const LogMatrix& a, std::span<const double> R) {
  if (R.size() != a.n) throw Error(ErrorCode::DimensionMismatch, "corrector has the wrong length");
  double g = kNegInf;
  for (std::size_t i = 0; i < a.n; ++i) g = std::max(g, row_value(a, R, i, nullptr));
  return g;
}

PerronValue perron_log_radius(const LogMatrix& a) {
  PerronValue out;
  const auto blocks = components(a);
  out.reducible = blocks.size() > 1;
  out.log_radius = kNegInf;
  for (const auto& block : blocks) {
    out.log_radius = std::max(out.log_radius, irreducible_log_radius(a, block, &out.iterations));
  }
  return out;
}

CorrectorSolution solve_corrector(const LogMatrix& a, double zeta, const UpsilonOptions& options) {
  const std::size_t n = a.n;
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) any = any || a(i, j) != kNegInf;
    if (!any) {
      throw Error(ErrorCode::Diverged, "weights vanish identically on residue " + std::to_string(i));
    }
  }
  const double perron = perron_log_radius(a).log_radius;

  std::vector<double> R(n, 0.0);
  std::vector<double> best_R = R;
  double best = corrector_objective(a, R);
  int iterations = 0;
  if (n > 1) {
    std::vector<double> pi(n);
    for (int k = 1; k <= options.max_iter && best - perron > options.tol; ++k, ++iterations) {
      std::size_t arg = 0;
      double top = kNegInf;
      for (std::size_t i = 0; i < n; ++i) {
        const double f = row_value(a, R, i, nullptr);
        if (f > top) {
          top = f;
          arg = i;
        }
      }
      row_value(a, R, arg, &pi);
      std::vector<double> g(n);
      for (std::size_t j = 0; j < n; ++j) g[j] = pi[j] - (j == arg ? 1.0 : 0.0);
      g[0] = 0.0;
      double norm = 0.0;
      for (double x : g) norm += x * x;
      norm = std::sqrt(norm);
      if (norm < 1e-300) break;
      const double step = options.step_scale / std::sqrt(static_cast<double>(k));
      for (std::size_t j = 1; j < n; ++j) R[j] -= step * g[j] / norm;
      const double value = corrector_objective(a, R);
      if (value < best) {
        best = value;
        best_R = R;
      }
    }
    if (best - perron > options.tol && options.newton_iter > 0) {
      iterations += newton_polish(a, best_R, best, best_R, options.newton_iter);
    }
  }

  CorrectorSolution sol;
  const double lowest = *std::min_element(best_R.begin(), best_R.end());
  sol.R.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.R[i] = best_R[i] - lowest + 1.0;
  sol.zeta = zeta;
  sol.upsilon = corrector_objective(a, sol.R);
  sol.iterations = iterations;
  sol.gap = (sol.upsilon == kNegInf && perron == kNegInf) ? 0.0 : std::abs(sol.upsilon - perron);
  return sol;
}

CorrectorSolution upsilon(const RenewalModel& model, std::shared_ptr<const EnvironmentSpec> periodic_spec,
                          std::span<const double> phi, double zeta, const UpsilonOptions& options) {
  const PeriodicKernel kernel(model, std::move(periodic_spec), phi);
  return solve_corrector(kernel.log_transfer(zeta), zeta, options);
}

double perron_upsilon(const RenewalModel& model, std::shared_ptr<const EnvironmentSpec> periodic_spec,
                      std::span<const double> phi, double zeta) {
  const PeriodicKernel kernel(model, std::move(periodic_spec), phi);
  return perron_log_radius(kernel.log_transfer(zeta)).log_radius;
}

FreeEnergyResult free_energy_variational(const PeriodicKernel& kernel, const FreeEnergyOptions& options) {
  FreeEnergyResult out;
  auto value = [&](double zeta) {
    ++out.evaluations;
    const LogMatrix a = kernel.log_transfer(zeta);
    if (options.perron) return perron_log_radius(a).log_radius;
    return solve_corrector(a, zeta, options.upsilon).upsilon;
  };

  double lo;
  double hi;
  if (options.bracket) {
    std::tie(lo, hi) = *options.bracket;
    if (!(lo < hi)) throw Error(ErrorCode::InvalidConfig, "bracket must satisfy lo < hi");
  } else {
    const auto [min_w, max_row] = kernel.weight_range();
    if (max_row == kNegInf) {
      out.z = kNegInf;
      out.at_lower_edge = true;
      return out;
    }
    lo = min_w - 1.0;
    hi = max_row + 1.0;
  }

  double width = std::max(1.0, hi - lo);
  int expansions = 0;
  while (value(hi) > 0.0) {
    if (++expansions > options.max_expansions) {
      throw Error(ErrorCode::BracketFailure, "no zeta with Upsilon <= 0 found");
    }
    lo = hi;
    hi += width;
    width *= 2.0;
  }
  if (value(lo) <= 0.0) {
    if (options.bracket) {
      out.z = lo;
      out.at_lower_edge = true;
      return out;
    }
    expansions = 0;
    width = std::max(1.0, hi - lo);
    while (value(lo) <= 0.0) {
      if (++expansions > options.max_expansions) {
        out.z = lo;
        out.at_lower_edge = true;
        return out;
      }
      hi = lo;
      lo -= width;
      width *= 2.0;
    }
  }
  while (hi - lo > options.tol * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (value(mid) <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.z = 0.5 * (lo + hi);
  return out;
}

FreeEnergyResult free_energy_variational(const RenewalModel& model,
                                         std::shared_ptr<const EnvironmentSpec> periodic_spec,
                                         std::span<const double> phi, const FreeEnergyOptions& options) {
  const PeriodicKernel kernel(model, std::move(periodic_spec), phi);
  return free_energy_variational(kernel, options);
}

void write_corrector_csv(const CorrectorSolution& solution, const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header({"zeta", "upsilon", "gap", "iterations"});
  csv.row_begin();
  csv.field(solution.zeta);
  csv.field(solution.upsilon);
  csv.field(solution.gap);
  csv.field(static_cast<long long>(solution.iterations));
  csv.row_end();
  csv.header({"state_index", "R"});
  for (std::size_t i = 0; i < solution.R.size(); ++i) {
    csv.row_begin();
    csv.field(static_cast<long long>(i));
    csv.field(solution.R[i]);
    csv.row_end();
  }
}

}  // namespace qldp
