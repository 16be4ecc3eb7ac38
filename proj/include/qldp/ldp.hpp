#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qldp/env.hpp"
#include "qldp/model.hpp"
#include "qldp/variational.hpp"

namespace qldp {

/// Exponential tail constant in [-inf, 0]. -inf is a distinct state, not a
/// float, so clipping by it is the identity and never produces NaN.
class TailConstant {
 public:
  static TailConstant minus_infinity() { return TailConstant(); }
  static TailConstant finite(double value);

  bool is_minus_infinity() const { return !value_.has_value(); }
  double value() const;  // throws InvalidCurve for -inf
  double clip(double z) const { return value_ ? std::max(z, *value_) : z; }
  std::string str() const;

 private:
  TailConstant() = default;
  std::optional<double> value_;
};

enum class CgfSource { Kingman, Variational, Perron };
std::string to_string(CgfSource source);

struct CgfPoint {
  std::vector<double> phi;
  double z = 0.0;
  CgfSource source = CgfSource::Kingman;
};

struct CgfCurve {
  int dim = 1;
  std::vector<CgfPoint> points;
  std::optional<TailConstant> ell;

  /// Throws NonConvexCurve on a midpoint-convexity violation (> tol) among
  /// points of one source, InvalidCurve when z(0) is missing or not finite.
  void check(double tol = 1e-6) const;
  bool convex(double tol = 1e-6) const;
  double z_at_zero() const;
};

struct LegendreValue {
  double value = 0.0;
  bool boundary = false;  // maximizer on the phi-grid edge: the true value may be +inf
};

/// sup_phi { phi . w - max(z(phi), ell) } over the sampled curve. In d = 1 the
/// grid maximum is refined by golden-section search on the piecewise-linear
/// interpolant around the maximizing grid point.
LegendreValue legendre(const CgfCurve& curve, std::span<const double> w,
                       const std::optional<TailConstant>& clip = std::nullopt);

namespace detail {
/// legendre() without the convexity check; callers check the curve once.
LegendreValue legendre_prechecked(const CgfCurve& curve, std::span<const double> w,
                                  const std::optional<TailConstant>& clip);
}  // namespace detail

enum class RateKind { Constrained, Free };
enum class Route { Kingman, Variational };

struct RatePoint {
  std::vector<double> w;
  double rate = 0.0;
  bool boundary = false;
};

struct RateCurve {
  RateKind kind = RateKind::Constrained;
  double normalization = 0.0;  // z(0) or max(z(0), ell)
  std::vector<RatePoint> points;
  CgfCurve cgf;
};

struct TailProbe {
  std::size_t s = 0;
  std::size_t t = 0;
  double log_tail_per_s = 0.0;  // (1/s) log P_{f^t omega}[S1 > s]
};

struct TailBracket {
  double eps = 0.0;
  double upper = 0.0;
  double lower = 0.0;
};

struct TailConstantEstimate {
  TailConstant ell = TailConstant::minus_infinity();
  bool agreed = false;
  bool polynomial_tail = false;
  std::vector<TailProbe> probes;
  std::vector<TailBracket> brackets;
};

struct TailConstantOptions {
  std::vector<double> eps_schedule{0.1, 0.05, 0.01};
  double floor = -50.0;       // upper estimates below this read as -inf
  double agree_tol = 1e-2;
};

/// Estimates ell from sup/inf over probe positions t of
/// (1/s) log P_{f^t omega}[S1 > s] -/+ eps t / s at the largest s.
TailConstantEstimate tail_constant(const RenewalModel& model, EnvironmentView env,
                                   std::span<const std::size_t> s_list, std::span<const std::size_t> t_probes,
                                   const TailConstantOptions& options = {});

/// s up to horizon/4 (doubling) and log-spaced t probes, for callers that do not care.
std::vector<std::size_t> default_tail_s_list(std::size_t horizon, int s_max);
std::vector<std::size_t> default_tail_t_probes(std::size_t horizon, std::size_t s_top);

struct RateOptions {
  std::size_t t = 2000;                      // Kingman route horizon
  std::optional<TailConstant> ell;           // overrides the estimated tail constant
  FreeEnergyOptions variational;
  int threads = 0;                           // 0: QLDP_THREADS or the OpenMP default
};

/// CGF over phi_grid by the chosen route, then the Legendre transform over
/// w_grid (clipped by ell for the free kind).
RateCurve rate_curve(const RenewalModel& model, const EnvironmentTrajectory& env,
                     const std::vector<std::vector<double>>& phi_grid,
                     const std::vector<std::vector<double>>& w_grid, RateKind kind, Route route,
                     const RateOptions& options = {});

/// Conjugate of a curve on a grid, returned as a curve over ys (d = 1 helper
/// used for biconjugation checks).
CgfCurve conjugate_curve(const CgfCurve& curve, std::span<const double> ys);

void write_cgf_csv(const CgfCurve& curve, const std::filesystem::path& path);
void write_rate_csv(const RateCurve& curve, const std::filesystem::path& path);

}  // namespace qldp
