#include "qldp/cli/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

#include "qldp/cli/commands.hpp"
#include "qldp/example_models.hpp"
#include "qldp/ldp.hpp"
#include "qldp/montecarlo.hpp"
#include "qldp/partition.hpp"
#include "qldp/rng.hpp"
#include "qldp/variational.hpp"

namespace qldp::cli {

namespace {

using nlohmann::json;

CriterionResult make_result(int id, std::string name) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::shared_ptr<const EnvironmentSpec> periodic_env(std::vector<std::string> labels,
                                                    std::vector<std::string> params = {},
                                                    std::vector<std::vector<double>> values = {}) {
  std::vector<Letter> letters;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    letters.push_back({labels[i], values.empty() ? std::vector<double>{} : values[i]});
  }
  return std::make_shared<const EnvironmentSpec>(EnvironmentSpec::periodic(std::move(params), std::move(letters)));
}

std::vector<std::vector<RewardAtom>> unit_rewards(int s_max) {
  return std::vector<std::vector<RewardAtom>>(s_max, {{{1.0}, 1.0}});
}

TableModel contact_model_06() {
  std::map<std::string, LetterTable> t;
  t.emplace("*", make_letter_table(WaitingLaw{{0.6, 0.4}, 0.0}, unit_rewards(2)));
  return TableModel(std::move(t), 1);
}

examples::PinningModel geometric_pinning(double h) {
  examples::PinningSpec spec;
  spec.h = h;
  spec.s_max = 60;
  spec.waiting = examples::geometric_waiting_law(0.5, 60);
  return examples::PinningModel(spec);
}

// --- 1: DP versus brute-force enumeration ------------------------------------

struct RandomCase {
  std::unique_ptr<TableModel> model;
  EnvironmentTrajectory traj;
  std::size_t t;
};

RandomCase random_case(std::uint64_t k) {
  CounterRng rng(0xC0FFEE, k);
  const int s_max = 1 + static_cast<int>(rng.uniform() * 4.0);
  const int dim = 1;
  std::map<std::string, LetterTable> tables;
  for (const char* label : {"A", "B"}) {
    WaitingLaw w;
    double total = 0.0;
    for (int s = 1; s <= s_max; ++s) {
      w.probs.push_back(0.05 + rng.uniform());
      total += w.probs.back();
    }
    const double defect = rng.uniform() < 0.5 ? 0.3 * rng.uniform() : 0.0;
    for (double& p : w.probs) p *= (1.0 - defect) / total;
    w.p_inf = defect;
    std::vector<std::vector<RewardAtom>> rewards;
    std::vector<double> v;
    for (int s = 1; s <= s_max; ++s) {
      const int atoms = 1 + static_cast<int>(rng.uniform() * 3.0);
      std::vector<RewardAtom> bucket;
      double mass = 0.0;
      for (int a = 0; a < atoms; ++a) {
        bucket.push_back({{std::floor(rng.uniform() * 5.0) - 2.0}, 0.1 + rng.uniform()});
        mass += bucket.back().mass;
      }
      for (auto& a : bucket) a.mass /= mass;
      rewards.push_back(std::move(bucket));
      v.push_back(rng.uniform() - 0.5);
    }
    // Rounding of the renormalization can leave the total off by an ulp.
    double sum = w.p_inf;
    for (double p : w.probs) sum += p;
    w.probs.back() += 1.0 - sum;
    tables.emplace(label, make_letter_table(std::move(w), rewards, std::move(v)));
  }
  const bool iid = rng.uniform() < 0.5;
  auto spec = iid ? std::make_shared<const EnvironmentSpec>(EnvironmentSpec::iid({}, {{"A", {}}, {"B", {}}}, {0.5, 0.5}))
                  : periodic_env({"A", "B", "B"});
  const std::size_t t = 8 + static_cast<std::size_t>(rng.uniform() * 5.0);
  auto model = std::make_unique<TableModel>(std::move(tables), dim);
  return {std::move(model), realize(spec, 100 + k, t), t};
}

double rel_err(double log_a, double log_b) {
  if (log_a == kNegInf && log_b == kNegInf) return 0.0;
  return std::abs(std::expm1(log_a - log_b));
}

CriterionResult criterion_oracle(const VerifyOptions& options) {
  CriterionResult r = make_result(1, "oracle equivalence (DP vs brute force)");
  r.time_limit = 10.0;
  double worst = 0.0;
  const double perturb = options.inject_broken_dp ? 1e-9 : 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const RandomCase c = random_case(k);
    for (double phi0 : {0.0, 0.5, -0.5}) {
      const double phi[1] = {phi0};
      StepLawSource source(*c.model, c.traj.view(), c.t);
      const RenewalDp dp = renewal_dp(source, phi, true);
      for (std::size_t tau = 1; tau <= c.t; ++tau) {
        const double brute = brute_force_partition(*c.model, c.traj.view(), tau, phi, true);
        worst = std::max(worst, rel_err(dp.table.log_z(tau) + perturb, brute));
      }
      const double brute_free = brute_force_partition(*c.model, c.traj.view(), c.t, phi, false);
      worst = std::max(worst, rel_err(*dp.log_free + perturb, brute_free));
    }
  }
  r.measured = "max relative error " + num(worst);
  r.expected = "<= 1e-12";
  r.pass = worst <= 1e-12;
  return r;
}

// --- 2: homogeneous pinning free energy ---------------------------------------

CriterionResult criterion_pinning(const VerifyOptions&) {
  CriterionResult r = make_result(2, "homogeneous pinning free energy");
  r.time_limit = 30.0;
  const double target = 1.0 + std::log(0.5 + 0.5 * std::exp(-1.0));
  const auto model = geometric_pinning(1.0);
  const auto env = periodic_env({"x"}, {"omega"}, {{0.0}});
  const double phi[1] = {0.0};
  const double zv = free_energy_variational(model, env, phi).z;
  const auto traj = realize(env, 1, 4000);
  const std::size_t t_list[1] = {4000};
  const double zk = kingman_cgf_estimate(model, traj.view(), phi, t_list).estimate;
  r.measured = "variational " + num(zv) + " (err " + num(std::abs(zv - target)) + "), kingman t=4000 " + num(zk) +
               " (err " + num(std::abs(zk - target)) + ")";
  r.expected = num(target) + " within 1e-5 / 1e-3";
  r.pass = std::abs(zv - target) <= 1e-5 && std::abs(zk - target) <= 1e-3;
  return r;
}

// --- 3: corrector solver versus Collatz-Wielandt ------------------------------

// Letters A, B, C; periodic environments pick a prefix of the cycle.
std::unique_ptr<TableModel> lettered_model() {
  std::map<std::string, LetterTable> t;
  const std::vector<RewardAtom> two{{{0.0}, 0.5}, {{1.0}, 0.5}};
  t.emplace("A", make_letter_table(WaitingLaw{{0.5, 0.3, 0.2}, 0.0}, {{{{1.0}, 1.0}}, two, {{{2.0}, 1.0}}},
                                   {0.1, -0.2, 0.3}));
  t.emplace("B", make_letter_table(WaitingLaw{{0.2, 0.2, 0.4}, 0.2}, {two, {{{1.0}, 1.0}}, two}, {0.0, 0.4, -0.1}));
  t.emplace("C", make_letter_table(WaitingLaw{{0.0, 0.7, 0.3}, 0.0}, {{{{1.0}, 1.0}}, {{{1.0}, 1.0}}, two}));
  return std::make_unique<TableModel>(std::move(t), 1);
}

CriterionResult criterion_collatz(const VerifyOptions&) {
  CriterionResult r = make_result(3, "corrector vs Collatz-Wielandt");
  r.time_limit = 60.0;
  const std::vector<std::vector<std::string>> cycles{{"A"}, {"A", "B"}, {"A", "B", "C"}};
  double worst = 0.0;
  for (const auto& cycle : cycles) {
    const auto model = lettered_model();
    const auto env = periodic_env(cycle);
    for (double phi0 : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      for (double zeta : {-0.5, -0.25, 0.0, 0.25, 0.5}) {
        const double phi[1] = {phi0};
        const double u = upsilon(*model, env, phi, zeta).upsilon;
        const double p = perron_upsilon(*model, env, phi, zeta);
        worst = std::max(worst, std::abs(u - p));
      }
    }
  }
  r.measured = "max |upsilon - perron| " + num(worst);
  r.expected = "<= 1e-8";
  r.pass = worst <= 1e-8;
  return r;
}

// --- 4: supermultiplicativity ---------------------------------------------------

CriterionResult criterion_supermult(const VerifyOptions&) {
  CriterionResult r = make_result(4, "supermultiplicativity");
  r.time_limit = 20.0;
  constexpr std::size_t kT = 200;
  double worst = -INFINITY;  // max of rhs - lhs
  std::map<std::string, LetterTable> homo;
  homo.emplace("*", make_letter_table(WaitingLaw{{0.5, 0.3, 0.2}, 0.0}, unit_rewards(3), {0.1, -0.2, 0.3}));
  const TableModel homogeneous(std::move(homo), 1);
  const auto period2 = lettered_model();
  const std::vector<std::pair<const RenewalModel*, std::shared_ptr<const EnvironmentSpec>>> cases{
      {&homogeneous, periodic_env({"x"})}, {period2.get(), periodic_env({"A", "B"})}};
  for (const auto& [model, env] : cases) {
    const auto traj = realize(env, 3, kT);
    for (double phi0 : {0.0, 0.3}) {
      const double phi[1] = {phi0};
      const auto full = constrained_partition(*model, traj.view(), kT, phi);
      for (std::size_t t = 1; t < kT; ++t) {
        const auto tail = constrained_partition(*model, shift(traj, t), kT - t, phi);
        for (std::size_t tp = 1; t + tp <= kT; ++tp) {
          const double lhs = full.log_z(t + tp);
          const double rhs = full.log_z(t) + tail.log_z(tp);
          if (rhs == kNegInf) continue;
          worst = std::max(worst, rhs - lhs);
        }
      }
    }
  }
  r.measured = "max [log Z_t + log Z'_t' - log Z_{t+t'}] " + num(worst);
  r.expected = "<= 1e-9";
  r.pass = worst <= 1e-9;
  return r;
}

// --- 5: free CGF clipping ---------------------------------------------------------

CriterionResult criterion_clipping(const VerifyOptions&) {
  CriterionResult r = make_result(5, "free-CGF clipping (compound Poisson)");
  r.time_limit = 60.0;
  const auto env = periodic_env({"x"}, {"rho"}, {{0.5}});
  examples::CompoundPoissonSpec spec;
  spec.s_max = 4096;
  const examples::CompoundPoissonModel model(*env, spec);
  const auto traj = realize(env, 5, 8192);
  const auto s_list = default_tail_s_list(traj.horizon(), model.s_max());
  const auto t_probes = default_tail_t_probes(traj.horizon(), s_list.back());
  const auto est = tail_constant(model, traj.view(), s_list, t_probes);
  const double ell_ref = std::log(0.5);
  const double ell = est.ell.is_minus_infinity() ? -INFINITY : est.ell.value();
  const double phi[1] = {-2.0};
  const double zf = free_partition(model, traj.view(), 4000, phi) / 4000.0;
  const bool ok_ell = std::abs(ell - ell_ref) <= 1e-3;
  const bool ok_free = std::abs(zf - ell) <= 2e-2;
  r.measured = "ell " + num(ell) + " (err " + num(std::abs(ell - ell_ref)) + "); (1/t) log free Z at phi=-2 " + num(zf) +
               " (gap to ell " + num(std::abs(zf - ell)) + ")";
  r.expected = "ell = log 0.5 within 1e-3; free value within 2e-2 of ell";
  r.pass = ok_ell && ok_free;
  return r;
}

// --- 6: Legendre transform ----------------------------------------------------------

CgfCurve sampled(const std::function<double(double)>& f, double lo, double hi, double step) {
  CgfCurve c;
  const auto n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  for (int k = 0; k <= n; ++k) {
    const double x = lo + k * step;
    c.points.push_back({{x}, f(x), CgfSource::Kingman});
  }
  return c;
}

CriterionResult criterion_legendre(const VerifyOptions&) {
  CriterionResult r = make_result(6, "Legendre correctness");
  const CgfCurve quad = sampled([](double x) { return 0.5 * x * x; }, -4.0, 4.0, 0.01);
  const double w1[1] = {1.0};
  const double j1 = legendre(quad, w1).value;
  const CgfCurve lin = sampled([](double x) { return x; }, -4.0, 4.0, 0.01);
  const double wh[1] = {0.5};
  const double i05 = legendre(lin, wh, TailConstant::finite(-1.0)).value;
  std::vector<double> ys;
  for (int k = 0; k <= 1000; ++k) ys.push_back(-5.0 + 0.01 * k);
  const CgfCurve J = conjugate_curve(quad, ys);
  double bic = 0.0;
  for (const auto& p : quad.points) {
    const double z2 = legendre(J, p.phi).value;
    bic = std::max(bic, std::abs(z2 - p.z));
  }
  r.measured = "J(1) " + num(j1) + ", I(0.5) " + num(i05) + ", biconjugate error " + num(bic);
  r.expected = "0.5 +- 1e-3, 0.5 +- 1e-3, <= 1e-3";
  r.pass = std::abs(j1 - 0.5) <= 1e-3 && std::abs(i05 - 0.5) <= 1e-3 && bic <= 1e-3;
  return r;
}

// --- 7: LDP overlay ------------------------------------------------------------------

CriterionResult criterion_overlay(const VerifyOptions&) {
  CriterionResult r = make_result(7, "LDP overlay (0.6/0.4 contact model)");
  r.time_limit = 180.0;
  const auto model = contact_model_06();
  const auto env = periodic_env({"x"});
  const auto traj = realize(env, 7, 400);
  const double grid[1] = {1.0};
  const double delta = 0.05;
  const double w1[1] = {1.0};
  const auto m400 = constrained_measure(model, traj.view(), 400, grid);
  const double exact400 = m400.log_ball_mass(w1, delta) / 400.0;
  const bool ok_exact = std::abs(exact400 - std::log(0.6)) <= 5e-3;

  const std::vector<std::vector<double>> ws{{0.7}, {0.85}, {1.0}};
  McOptions mc;
  mc.batches = 8;
  const auto rows = empirical_rate_scan(model, traj.view(), 200, ws, delta, 100000, 2024, MeasureKind::Constrained, mc);
  const auto m200 = constrained_measure(model, traj.view(), 200, grid);
  bool ok_mc = true;
  std::ostringstream mc_text;
  for (std::size_t k = 0; k < ws.size(); ++k) {
    const double exact = m200.log_ball_mass(ws[k], delta) / 200.0;
    const auto& e = rows[k].estimate;
    const bool ok = e.hits > 0 && std::abs(e.log_mass_per_t - exact) <= 3.0 * e.std_error;
    ok_mc = ok_mc && ok;
    mc_text << " w=" << num(ws[k][0]) << ": mc " << num(e.log_mass_per_t) << " se " << num(e.std_error) << " hits "
            << e.hits << " exact " << num(exact) << (ok ? "" : " [off]") << ";";
  }
  r.measured = "exact t=400 at w=1: " + num(exact400) + ";" + mc_text.str();
  r.expected = "log 0.6 = " + num(std::log(0.6)) + " within 5e-3; MC within 3 SE of the t=200 ball mass";
  r.pass = ok_exact && ok_mc;
  return r;
}

// --- 8: affine stretch -------------------------------------------------------------------

CriterionResult criterion_affine(const VerifyOptions&) {
  CriterionResult r = make_result(8, "affine stretch of the contact-fraction rate");
  r.time_limit = 60.0;
  const auto model = geometric_pinning(0.0);
  const auto env = periodic_env({"x"}, {"omega"}, {{0.0}});
  const auto traj = realize(env, 8, 64);
  std::vector<std::vector<double>> phis;
  for (int k = 0; k <= 1200; ++k) phis.push_back({-6.0 + 0.01 * k});
  std::vector<std::vector<double>> ws;
  for (int k = 1; k <= 19; ++k) ws.push_back({0.05 * k});
  const auto curve = rate_curve(model, traj, phis, ws, RateKind::Constrained, Route::Variational);
  double slope = 0.0;
  double min_second = INFINITY;
  for (std::size_t k = 0; k + 1 < ws.size(); ++k) {
    if (ws[k + 1][0] <= 0.5 + 1e-12) {
      slope = std::max(slope, std::abs(curve.points[k + 1].rate - curve.points[k].rate) / 0.05);
    }
  }
  for (std::size_t k = 1; k + 1 < ws.size(); ++k) {
    if (ws[k - 1][0] >= 0.55 - 1e-12) {
      min_second =
          std::min(min_second, curve.points[k - 1].rate - 2.0 * curve.points[k].rate + curve.points[k + 1].rate);
    }
  }
  r.measured = "max |slope| on (0,0.5] " + num(slope) + ", min second difference on [0.55,0.95] " + num(min_second);
  r.expected = "slope <= 1e-3, second difference >= 1e-3";
  r.pass = slope <= 1e-3 && min_second >= 1e-3;
  return r;
}

// --- 9: Markov-return tail constant ---------------------------------------------------------

double path_sum(const std::vector<std::vector<double>>& K, int c, int s) {
  if (s == 1) return K[c][c];
  const int n = static_cast<int>(K.size());
  double total = 0.0;
  std::function<void(int, int, double)> rec = [&](int a, int steps_left, double w) {
    if (steps_left == 0) {
      total += w * K[a][c];
      return;
    }
    for (int b = 0; b < n; ++b) {
      if (b != c) rec(b, steps_left - 1, w * K[a][b]);
    }
  };
  for (int a = 0; a < n; ++a) {
    if (a != c) rec(a, s - 2, K[c][a]);
  }
  return total;
}

CriterionResult criterion_markov(const VerifyOptions&) {
  CriterionResult r = make_result(9, "Markov-return tail constant");
  r.time_limit = 10.0;
  const std::vector<std::vector<double>> K{{0.5, 0.5}, {0.3, 0.7}};
  examples::MarkovReturnSpec spec;
  spec.n_states = 2;
  spec.c = 0;
  spec.K["*"] = K;
  spec.s_max = 2048;
  const examples::MarkovReturnModel model(spec);
  const auto env = periodic_env({"x"});
  const auto traj = realize(env, 9, 4096);
  const auto s_list = default_tail_s_list(traj.horizon(), model.s_max());
  const auto t_probes = default_tail_t_probes(traj.horizon(), s_list.back());
  const auto est = tail_constant(model, traj.view(), s_list, t_probes);
  const double ell = est.ell.is_minus_infinity() ? -INFINITY : est.ell.value();
  const StepLaw law = model.step_law(traj.view(), 0, 6);
  double worst = 0.0;
  for (int s = 1; s <= 6; ++s) worst = std::max(worst, std::abs(std::exp(law.log_prob[s - 1]) - path_sum(K, 0, s)));
  r.measured = "ell " + num(ell) + " (err " + num(std::abs(ell - std::log(0.7))) + "), max |p(s) - path sum| " + num(worst);
  r.expected = "log 0.7 within 1e-3; p(s) within 1e-12 for s <= 6";
  r.pass = std::abs(ell - std::log(0.7)) <= 1e-3 && worst <= 1e-12;
  return r;
}

// --- 10: determinism ----------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json determinism_config(const std::string& which) {
  json c;
  c["seed"] = 11;
  c["phi_grid"] = {{"min", -1.0}, {"max", 1.0}, {"step", 0.25}};
  c["w_grid"] = {{"min", 0.5}, {"max", 1.0}, {"step", 0.05}};
  c["mc"] = {{"n_samples", 20000}, {"delta", 0.05}, {"batch_partition", 8}, {"t", 100}};
  c["route_tolerance"] = 1e9;
  if (which == "contact") {
    c["environment"] = {{"kind", "periodic"}, {"letters", json::array({{{"label", "x"}}})}};
    c["model"] = {{"builder", "table"},
                  {"letters", {{"*", {{"p", {0.6, 0.4}}, {"reward", json::array({{{"point", 1.0}, {"mass", 1.0}}})}}}}}};
    c["horizon"] = 400;
    c["t_list"] = {100, 200, 400};
  } else {
    c["environment"] = {{"kind", "iid"},
                        {"params", {"rho"}},
                        {"letters", json::array({{{"label", "lo"}, {"params", {0.3}}}, {{"label", "hi"}, {"params", {0.6}}}})},
                        {"law", {0.5, 0.5}}};
    c["model"] = {{"builder", "compound_poisson"}, {"s_max", 256}};
    c["horizon"] = 1024;
    c["t_list"] = {200, 400};
    c["kind"] = "free";
  }
  return c;
}

CriterionResult criterion_determinism(const VerifyOptions& options) {
  CriterionResult r = make_result(10, "determinism");
  const char* saved = std::getenv("QLDP_THREADS");
  const std::string saved_value = saved ? saved : "";
  std::size_t compared = 0;
  std::vector<std::string> mismatches;
  for (const std::string which : {"contact", "cpoisson"}) {
    std::vector<std::map<std::string, std::string>> runs;
    for (const char* threads : {"1", "1", "4"}) {
      setenv("QLDP_THREADS", threads, 1);
      const auto dir = options.scratch_dir / (which + "_run" + std::to_string(runs.size()));
      std::filesystem::remove_all(dir);
      json j = determinism_config(which);
      j["output_dir"] = dir.string();
      const auto config = parse_config(j);
      std::ostringstream sink;
      cmd_cgf(config, sink);
      cmd_rate(config, sink);
      cmd_simulate(config, sink);
      std::map<std::string, std::string> files;
      for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        files[entry.path().filename().string()] = slurp(entry.path());
      }
      runs.push_back(std::move(files));
    }
    for (std::size_t k = 1; k < runs.size(); ++k) {
      if (runs[k].size() != runs[0].size()) mismatches.push_back(which + ": file sets differ");
      for (const auto& [name, bytes] : runs[0]) {
        ++compared;
        const auto it = runs[k].find(name);
        if (it == runs[k].end() || it->second != bytes) mismatches.push_back(which + "/" + name + " run " + std::to_string(k));
      }
    }
  }
  if (saved) {
    setenv("QLDP_THREADS", saved_value.c_str(), 1);
  } else {
    unsetenv("QLDP_THREADS");
  }
  r.measured = std::to_string(compared) + " file comparisons, " + std::to_string(mismatches.size()) + " mismatches";
  for (const auto& m : mismatches) r.measured += " [" + m + "]";
  r.expected = "byte-identical reruns (QLDP_THREADS 1, 1, 4; batch_partition 8)";
  r.pass = mismatches.empty();
  return r;
}

}  // namespace

CriterionResult run_criterion(int id, const VerifyOptions& options) {
  using Fn = CriterionResult (*)(const VerifyOptions&);
  static const Fn table[kCriteria] = {criterion_oracle,   criterion_pinning,    criterion_collatz, criterion_supermult,
                                      criterion_clipping, criterion_legendre,   criterion_overlay, criterion_affine,
                                      criterion_markov,   criterion_determinism};
  if (id < 1 || id > kCriteria) throw Error(ErrorCode::InvalidConfig, "no criterion " + std::to_string(id));
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = table[id - 1](options);
  } catch (const std::exception& e) {
    r.id = id;
    r.pass = false;
    r.measured = std::string("threw ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.time_limit && r.seconds > *r.time_limit) r.pass = false;
  return r;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass ? "[PASS] " : "[FAIL] ") << "criterion " << r.id << " " << r.name << " | measured: " << r.measured
     << " | expected: " << r.expected << " | " << num(r.seconds) << " s";
  if (r.time_limit) os << " (limit " << num(*r.time_limit) << " s)";
  return os.str();
}

int cmd_verify(const std::vector<int>& ids, const VerifyOptions& options, std::ostream& out) {
  std::vector<int> todo = ids;
  if (todo.empty()) {
    for (int k = 1; k <= kCriteria; ++k) todo.push_back(k);
  }
  int failed = 0;
  for (int id : todo) {
    const auto r = run_criterion(id, options);
    out << format_result(r) << std::endl;
    failed += r.pass ? 0 : 1;
  }
  out << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? kOk : kNumerical;
}

}  // namespace qldp::cli
