#include "qldp/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "qldp/csv.hpp"
#include "qldp/error.hpp"
#include "qldp/kernels.hpp"
#include "qldp/logspace.hpp"
#include "qldp/partition.hpp"

namespace qldp {

TailConstant TailConstant::finite(double value) {
  if (!(value <= 0.0)) throw Error(ErrorCode::InvalidConfig, "tail constant must be <= 0");
  TailConstant c;
  c.value_ = value;
  return c;
}

double TailConstant::value() const {
  if (!value_) throw Error(ErrorCode::InvalidCurve, "tail constant is -inf");
  return *value_;
}

std::string TailConstant::str() const { return value_ ? format_double(*value_) : "-inf"; }

std::string to_string(CgfSource source) {
  switch (source) {
    case CgfSource::Kingman: return "kingman";
    case CgfSource::Variational: return "variational";
    case CgfSource::Perron: return "perron";
  }
  return "unknown";
}

namespace {

using Coords = std::vector<long long>;

Coords grid_key(std::span<const double> phi) {
  Coords key;
  for (double x : phi) key.push_back(std::llround(x * 1e9));
  return key;
}

bool convex_1d(std::vector<const CgfPoint*> pts, double tol) {
  std::sort(pts.begin(), pts.end(), [](const CgfPoint* a, const CgfPoint* b) { return a->phi[0] < b->phi[0]; });
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double x0 = pts[i - 1]->phi[0];
    const double x1 = pts[i]->phi[0];
    const double x2 = pts[i + 1]->phi[0];
    if (x2 <= x0) continue;
    const double chord = pts[i - 1]->z + (pts[i + 1]->z - pts[i - 1]->z) * (x1 - x0) / (x2 - x0);
    if (pts[i]->z > chord + tol) return false;
  }
  return true;
}

bool convex_midpoints(const std::vector<const CgfPoint*>& pts, double tol) {
  std::map<Coords, double> by_key;
  for (const auto* p : pts) by_key[grid_key(p->phi)] = p->z;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      std::vector<double> mid(pts[a]->phi.size());
      for (std::size_t j = 0; j < mid.size(); ++j) mid[j] = 0.5 * (pts[a]->phi[j] + pts[b]->phi[j]);
      const auto it = by_key.find(grid_key(mid));
      if (it == by_key.end()) continue;
      if (it->second > 0.5 * (pts[a]->z + pts[b]->z) + tol) return false;
    }
  }
  return true;
}

double clipped(double z, const std::optional<TailConstant>& clip) { return clip ? clip->clip(z) : z; }

}  // namespace

bool CgfCurve::convex(double tol) const {
  std::map<CgfSource, std::vector<const CgfPoint*>> groups;
  for (const auto& p : points) groups[p.source].push_back(&p);
  for (const auto& [source, pts] : groups) {
    if (dim == 1 ? !convex_1d(pts, tol) : !convex_midpoints(pts, tol)) return false;
  }
  return true;
}

double CgfCurve::z_at_zero() const {
  for (const auto& p : points) {
    bool zero = true;
    for (double x : p.phi) zero = zero && std::abs(x) <= 1e-9;
    if (zero) {
      if (!std::isfinite(p.z)) throw Error(ErrorCode::InvalidCurve, "z(0) is not finite");
      return p.z;
    }
  }
  throw Error(ErrorCode::InvalidCurve, "curve has no point at phi = 0");
}

void CgfCurve::check(double tol) const {
  if (dim < 1 || dim > 2) throw Error(ErrorCode::InvalidCurve, "transforms support d <= 2");
  for (const auto& p : points) {
    if (p.phi.size() != static_cast<std::size_t>(dim)) {
      throw Error(ErrorCode::DimensionMismatch, "curve point has the wrong dimension");
    }
  }
  z_at_zero();
  if (!convex(tol)) throw Error(ErrorCode::NonConvexCurve, "sampled CGF violates midpoint convexity");
}

namespace detail {

LegendreValue legendre_prechecked(const CgfCurve& curve, std::span<const double> w,
                                  const std::optional<TailConstant>& clip) {
  if (w.size() != static_cast<std::size_t>(curve.dim)) {
    throw Error(ErrorCode::DimensionMismatch, "w has the wrong dimension");
  }
  const auto& pts = curve.points;
  if (pts.empty()) throw Error(ErrorCode::InvalidCurve, "empty curve");
  LegendreValue out;
  if (curve.dim == 1) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pts[a].phi[0] < pts[b].phi[0]; });
    std::vector<double> xs;
    std::vector<double> zs;
    for (std::size_t k : order) {
      xs.push_back(pts[k].phi[0]);
      zs.push_back(clipped(pts[k].z, clip));
    }
    const std::size_t n = xs.size();
    std::vector<double> g(n);
    std::size_t arg = 0;
    for (std::size_t k = 0; k < n; ++k) {
      g[k] = xs[k] * w[0] - zs[k];
      if (g[k] >= g[arg]) arg = k;
    }
    double best = g[arg];
    if (n >= 2) {
      // Piecewise-linear interpolant of the unclipped curve, clipped pointwise.
      auto h = [&](double x) {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - xs.begin(), 1), n - 1);
        const double x0 = xs[j - 1];
        const double x1 = xs[j];
        const double z0 = pts[order[j - 1]].z;
        const double z1 = pts[order[j]].z;
        const double lin = x1 > x0 ? z0 + (z1 - z0) * (x - x0) / (x1 - x0) : std::max(z0, z1);
        return x * w[0] - clipped(lin, clip);
      };
      double a = xs[arg == 0 ? 0 : arg - 1];
      double b = xs[arg + 1 < n ? arg + 1 : n - 1];
      const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - ratio * (b - a);
      double d = a + ratio * (b - a);
      double hc = h(c);
      double hd = h(d);
      for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
        if (hc >= hd) {
          b = d;
          d = c;
          hd = hc;
          c = b - ratio * (b - a);
          hc = h(c);
        } else {
          a = c;
          c = d;
          hc = hd;
          d = a + ratio * (b - a);
          hd = h(d);
        }
      }
      best = std::max({best, hc, hd});
      out.boundary = (arg == 0 && g[0] > g[1]) || (arg == n - 1 && g[n - 1] > g[n - 2]);
    } else {
      out.boundary = true;
    }
    out.value = best;
    return out;
  }

  std::vector<double> lo(curve.dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(curve.dim, -std::numeric_limits<double>::infinity());
  for (const auto& p : pts) {
    for (int j = 0; j < curve.dim; ++j) {
      lo[j] = std::min(lo[j], p.phi[j]);
      hi[j] = std::max(hi[j], p.phi[j]);
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  const CgfPoint* arg = nullptr;
  for (const auto& p : pts) {
    double dot = 0.0;
    for (int j = 0; j < curve.dim; ++j) dot += p.phi[j] * w[j];
    const double g = dot - clipped(p.z, clip);
    if (g > best) {
      best = g;
      arg = &p;
    }
  }
  out.value = best;
  for (int j = 0; j < curve.dim; ++j) {
    if (arg->phi[j] == lo[j] || arg->phi[j] == hi[j]) out.boundary = true;
  }
  return out;
}

}  // namespace detail

LegendreValue legendre(const CgfCurve& curve, std::span<const double> w, const std::optional<TailConstant>& clip) {
  curve.check();
  return detail::legendre_prechecked(curve, w, clip);
}

CgfCurve conjugate_curve(const CgfCurve& curve, std::span<const double> ys) {
  if (curve.dim != 1) throw Error(ErrorCode::InvalidCurve, "conjugate_curve is one-dimensional");
  if (!curve.convex()) throw Error(ErrorCode::NonConvexCurve, "sampled curve violates midpoint convexity");
  CgfCurve out;
  out.dim = 1;
  for (double y : ys) {
    const double w[1] = {y};
    const auto v = detail::legendre_prechecked(curve, w, std::nullopt);
    out.points.push_back({{y}, v.value, curve.points.front().source});
  }
  return out;
}

std::vector<std::size_t> default_tail_s_list(std::size_t horizon, int s_max) {
  const std::size_t cap = std::max<std::size_t>(1, std::min<std::size_t>(horizon / 4, std::max(1, s_max / 2)));
  std::vector<std::size_t> out;
  for (std::size_t s = 8; s <= cap; s *= 2) out.push_back(s);
  if (out.empty() || out.back() != cap) out.push_back(cap);
  return out;
}

std::vector<std::size_t> default_tail_t_probes(std::size_t horizon, std::size_t s_top) {
  std::vector<std::size_t> out{0};
  const std::size_t room = horizon > s_top ? horizon - s_top : 0;
  for (std::size_t t = 1; t <= room && out.size() < 8; t *= 4) out.push_back(t);
  return out;
}

TailConstantEstimate tail_constant(const RenewalModel& model, EnvironmentView env,
                                   std::span<const std::size_t> s_list, std::span<const std::size_t> t_probes,
                                   const TailConstantOptions& options) {
  if (s_list.empty() || t_probes.empty()) throw Error(ErrorCode::InvalidConfig, "empty probe lists");
  TailConstantEstimate est;
  for (std::size_t s : s_list) {
    if (s == 0) throw Error(ErrorCode::InvalidConfig, "tail probes need s >= 1");
    for (std::size_t t : t_probes) {
      const double lp = log_tail_probability(model, env, t, s);
      est.probes.push_back({s, t, lp == kNegInf ? kNegInf : lp / static_cast<double>(s)});
    }
  }

  const std::size_t s_top = *std::max_element(s_list.begin(), s_list.end());
  for (double eps : options.eps_schedule) {
    TailBracket br{eps, kNegInf, std::numeric_limits<double>::infinity()};
    for (const auto& pr : est.probes) {
      if (pr.s != s_top) continue;
      const double slack = eps * static_cast<double>(pr.t) / static_cast<double>(pr.s);
      br.upper = std::max(br.upper, pr.log_tail_per_s - slack);
      br.lower = std::min(br.lower, pr.log_tail_per_s + slack);
    }
    est.brackets.push_back(br);
  }
  const TailBracket& last = est.brackets.back();
  if (last.upper < options.floor) {
    est.ell = TailConstant::minus_infinity();
    est.agreed = true;
    return est;
  }
  const double mid = std::min(0.0, 0.5 * (last.upper + last.lower));
  est.agreed = std::abs(last.lower - last.upper) <= options.agree_tol;
  est.ell = TailConstant::finite(mid);

  // Polynomial tails: straight in log-log coordinates, vanishing linear slope.
  std::vector<std::size_t> ss(s_list.begin(), s_list.end());
  std::sort(ss.begin(), ss.end());
  ss.erase(std::unique(ss.begin(), ss.end()), ss.end());
  if (ss.size() >= 3) {
    const std::size_t t0 = t_probes.front();
    auto log_tail = [&](std::size_t s) {
      for (const auto& pr : est.probes) {
        if (pr.s == s && pr.t == t0) return pr.log_tail_per_s * static_cast<double>(s);
      }
      return kNegInf;
    };
    const std::size_t sa = ss[ss.size() - 3];
    const std::size_t sb = ss[ss.size() - 2];
    const std::size_t sc = ss[ss.size() - 1];
    const double la = log_tail(sa);
    const double lb = log_tail(sb);
    const double lc = log_tail(sc);
    if (std::isfinite(la) && std::isfinite(lb) && std::isfinite(lc)) {
      const double lin_ab = (lb - la) / static_cast<double>(sb - sa);
      const double lin_bc = (lc - lb) / static_cast<double>(sc - sb);
      const double ll_ab = (lb - la) / std::log(static_cast<double>(sb) / static_cast<double>(sa));
      const double ll_bc = (lc - lb) / std::log(static_cast<double>(sc) / static_cast<double>(sb));
      const bool straight = std::abs(ll_bc - ll_ab) <= 0.1 * std::abs(ll_bc) + 0.05;
      const bool decaying = ll_bc < -0.05 && std::abs(lin_bc) <= 0.75 * std::abs(lin_ab);
      if (straight && decaying) {
        est.polynomial_tail = true;
        est.ell = TailConstant::finite(0.0);
      }
    }
  }
  return est;
}

RateCurve rate_curve(const RenewalModel& model, const EnvironmentTrajectory& env,
                     const std::vector<std::vector<double>>& phi_grid,
                     const std::vector<std::vector<double>>& w_grid, RateKind kind, Route route,
                     const RateOptions& options) {
  if (phi_grid.empty() || w_grid.empty()) throw Error(ErrorCode::InvalidConfig, "grids must be nonempty");
  const int threads = kernels::resolve_threads(options.threads);
  RateCurve out;
  out.kind = kind;
  out.cgf.dim = model.dim();
  if (route == Route::Variational) {
    if (env.spec().kind != EnvKind::Periodic) {
      throw Error(ErrorCode::NotPeriodic, "variational route needs a periodic environment");
    }
    const auto zs = kernels::parallel::variational_sweep(model, env.spec_ptr(), phi_grid, options.variational, threads);
    for (std::size_t k = 0; k < phi_grid.size(); ++k) {
      out.cgf.points.push_back({phi_grid[k], zs[k].z, CgfSource::Variational});
    }
  } else {
    const std::size_t t = std::min(options.t, env.horizon());
    const std::size_t t_list[1] = {t};
    const auto est = kernels::parallel::kingman_sweep(model, env.view(), t_list, phi_grid, threads);
    for (std::size_t k = 0; k < phi_grid.size(); ++k) {
      out.cgf.points.push_back({phi_grid[k], est[k].estimate, CgfSource::Kingman});
    }
  }
  out.cgf.check();

  std::optional<TailConstant> clip;
  if (kind == RateKind::Free) {
    if (options.ell) {
      clip = *options.ell;
    } else {
      const auto s_list = default_tail_s_list(env.horizon(), model.s_max());
      const auto t_probes = default_tail_t_probes(env.horizon(), s_list.back());
      clip = tail_constant(model, env.view(), s_list, t_probes).ell;
    }
    out.cgf.ell = clip;
  }
  const double z0 = out.cgf.z_at_zero();
  out.normalization = clipped(z0, clip);

  const auto values = kernels::parallel::legendre_sweep(out.cgf, w_grid, clip, threads);
  for (std::size_t k = 0; k < w_grid.size(); ++k) {
    out.points.push_back({w_grid[k], values[k].value, values[k].boundary});
  }
  return out;
}

void write_cgf_csv(const CgfCurve& curve, const std::filesystem::path& path) {
  CsvWriter csv(path);
  std::vector<std::string> header;
  for (int j = 0; j < curve.dim; ++j) header.push_back("phi_" + std::to_string(j + 1));
  header.emplace_back("z");
  header.emplace_back("source");
  csv.header(header);
  for (const auto& p : curve.points) {
    csv.row_begin();
    for (double x : p.phi) csv.field(x);
    csv.field(p.z);
    csv.field(std::string_view(to_string(p.source)));
    csv.row_end();
  }
}

void write_rate_csv(const RateCurve& curve, const std::filesystem::path& path) {
  CsvWriter csv(path);
  const std::size_t d = curve.points.empty() ? 1 : curve.points.front().w.size();
  std::vector<std::string> header;
  for (std::size_t j = 0; j < d; ++j) header.push_back("w_" + std::to_string(j + 1));
  header.insert(header.end(), {"rate", "normalized_rate", "boundary_flag"});
  csv.header(header);
  for (const auto& p : curve.points) {
    csv.row_begin();
    for (double x : p.w) csv.field(x);
    csv.field(p.rate);
    csv.field(p.rate + curve.normalization);
    csv.field(static_cast<long long>(p.boundary ? 1 : 0));
    csv.row_end();
  }
}

}  // namespace qldp
