#include "qldp/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qldp/error.hpp"
#include "qldp/example_models.hpp"

namespace qldp::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

std::vector<double> scalar_or_vector(const json& j, const char* key) {
  if (!j.contains(key)) bad(std::string("grid needs '") + key + "'");
  const json& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

GridSpec parse_grid(const json& j, const char* name) {
  if (!j.is_object()) bad(std::string(name) + " must be an object {min, max, step}");
  GridSpec g{scalar_or_vector(j, "min"), scalar_or_vector(j, "max"), scalar_or_vector(j, "step")};
  if (g.min.empty() || g.min.size() != g.max.size() || g.min.size() != g.step.size()) {
    bad(std::string(name) + ": min, max and step need the same nonzero length");
  }
  return g;
}

std::vector<RewardAtom> parse_atoms(const json& j) {
  std::vector<RewardAtom> atoms;
  for (const auto& a : j) {
    RewardAtom atom;
    const json& p = a.at("point");
    atom.point = p.is_number() ? std::vector<double>{p.get<double>()} : p.get<std::vector<double>>();
    atom.mass = a.at("mass").get<double>();
    atoms.push_back(std::move(atom));
  }
  return atoms;
}

WaitingLaw parse_waiting(const json& j) {
  if (j.contains("geometric")) return examples::geometric_waiting_law(j.at("geometric").get<double>(), j.value("s_max", 60));
  WaitingLaw law;
  law.probs = j.at("p").get<std::vector<double>>();
  law.p_inf = j.value("p_inf", 0.0);
  law.validate();
  return law;
}

std::vector<Letter> parse_letters(const json& j) {
  std::vector<Letter> letters;
  for (const auto& l : j) letters.push_back({l.at("label").get<std::string>(), l.value("params", std::vector<double>{})});
  return letters;
}

std::unique_ptr<RenewalModel> build_table(const json& j) {
  const int dim = j.value("dim", 1);
  std::map<std::string, LetterTable> tables;
  for (const auto& [label, block] : j.at("letters").items()) {
    WaitingLaw waiting = parse_waiting(block);
    std::vector<std::vector<RewardAtom>> rewards;
    if (block.contains("rewards")) {
      for (const auto& bucket : block.at("rewards")) rewards.push_back(parse_atoms(bucket));
    } else if (block.contains("reward")) {
      rewards.assign(waiting.s_max(), parse_atoms(block.at("reward")));
    } else {
      rewards.assign(waiting.s_max(), std::vector<RewardAtom>{{std::vector<double>(dim, 1.0), 1.0}});
    }
    std::vector<double> v = block.value("v", std::vector<double>{});
    tables.emplace(label, make_letter_table(std::move(waiting), rewards, std::move(v)));
  }
  return std::make_unique<TableModel>(std::move(tables), dim);
}

}  // namespace

std::vector<std::vector<double>> GridSpec::points() const {
  std::vector<std::vector<double>> axes(dim());
  for (std::size_t j = 0; j < dim(); ++j) {
    const auto n = static_cast<std::size_t>(std::floor((max[j] - min[j]) / step[j] + 1e-9)) + 1;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = min[j] + static_cast<double>(k) * step[j];
      axes[j].push_back(std::abs(x) < 1e-9 * step[j] ? 0.0 : x);  // land exactly on phi = 0
    }
  }
  std::vector<std::vector<double>> out{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : out) {
      for (double x : axis) {
        auto p = prefix;
        p.push_back(x);
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

void ExperimentConfig::validate() const {
  for (const GridSpec* g : {&phi_grid, &w_grid}) {
    if (g->dim() == 0) bad("grids must be nonempty");
    for (std::size_t j = 0; j < g->dim(); ++j) {
      if (!(g->step[j] > 0.0)) bad("grid step must be > 0");
      if (g->max[j] < g->min[j]) bad("grid max < min");
    }
  }
  if (t_list.empty()) bad("t_list must be nonempty");
  if (std::find(t_list.begin(), t_list.end(), 0) != t_list.end()) bad("t_list entries must be >= 1");
  if (horizon < t_max()) bad("horizon must be >= max(t_list)");
  if (horizon < mc_t()) bad("horizon must be >= mc.t");
  if (mc.n_samples < 1) bad("mc.n_samples must be >= 1");
  if (!(mc.delta > 0.0)) bad("mc.delta must be > 0");
  if (mc.batch_partition < 1 || mc.batch_partition > mc.n_samples) bad("mc.batch_partition must lie in [1, n_samples]");
  if (!(route_tolerance >= 0.0)) bad("route_tolerance must be >= 0");
}

std::size_t ExperimentConfig::t_max() const {
  return t_list.empty() ? 0 : *std::max_element(t_list.begin(), t_list.end());
}

std::size_t ExperimentConfig::mc_t() const { return mc.t.value_or(t_max()); }

RouteChoice parse_route(const std::string& s) {
  if (s == "kingman") return RouteChoice::Kingman;
  if (s == "variational") return RouteChoice::Variational;
  if (s == "both") return RouteChoice::Both;
  bad("route must be kingman, variational or both");
}

RateKind parse_kind(const std::string& s) {
  if (s == "constrained") return RateKind::Constrained;
  if (s == "free") return RateKind::Free;
  bad("kind must be constrained or free");
}

EnvironmentSpec parse_environment(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  EnvironmentSpec spec;
  if (kind == "gauss_hermite") {
    spec = examples::gauss_hermite_disorder(j.value("nodes", 21), j.value("param", std::string("omega")));
  } else {
    auto params = j.value("params", std::vector<std::string>{});
    auto letters = parse_letters(j.at("letters"));
    if (kind == "periodic") {
      spec = EnvironmentSpec::periodic(std::move(params), std::move(letters));
    } else if (kind == "iid") {
      spec = EnvironmentSpec::iid(std::move(params), std::move(letters), j.at("law").get<std::vector<double>>());
    } else if (kind == "markov") {
      spec = EnvironmentSpec::markov(std::move(params), std::move(letters),
                                     j.at("transition").get<std::vector<std::vector<double>>>(),
                                     j.at("initial").get<std::vector<double>>());
    } else {
      bad("environment.kind must be periodic, iid, markov or gauss_hermite");
    }
  }
  spec.validate();
  return spec;
}

std::unique_ptr<RenewalModel> build_model(const json& j, const EnvironmentSpec& env) {
  try {
    const std::string builder = j.at("builder").get<std::string>();
    if (builder == "table") return build_table(j);
    if (builder == "compound_poisson") {
      examples::CompoundPoissonSpec s;
      s.rho_param = j.value("rho_param", s.rho_param);
      s.s_max = j.value("s_max", s.s_max);
      if (j.contains("rewards")) {
        for (const auto& [label, atoms] : j.at("rewards").items()) s.rewards[label] = parse_atoms(atoms);
      }
      return std::make_unique<examples::CompoundPoissonModel>(env, std::move(s));
    }
    if (builder == "pinning") {
      examples::PinningSpec s;
      s.alpha = j.value("alpha", s.alpha);
      s.h = j.value("h", s.h);
      s.beta = j.value("beta", s.beta);
      s.disorder_param = j.value("disorder_param", s.disorder_param);
      s.s_max = j.value("s_max", s.s_max);
      const std::string obs = j.value("observable", std::string("contacts"));
      if (obs == "contacts") {
        s.observable = examples::PinningObservable::Contacts;
      } else if (obs == "excursions") {
        s.observable = examples::PinningObservable::Excursions;
      } else {
        bad("pinning observable must be contacts or excursions");
      }
      s.truncation_cap = j.value("truncation_cap", s.truncation_cap);
      s.excursion_dim_cap = j.value("excursion_dim_cap", s.excursion_dim_cap);
      if (j.contains("waiting")) {
        json w = j.at("waiting");
        if (!w.contains("s_max")) w["s_max"] = s.s_max;
        s.waiting = parse_waiting(w);
      }
      return std::make_unique<examples::PinningModel>(std::move(s));
    }
    if (builder == "markov_return") {
      examples::MarkovReturnSpec s;
      s.n_states = j.value("n_states", s.n_states);
      s.c = j.value("c", s.c);
      s.s_max = j.value("s_max", s.s_max);
      for (const auto& [label, k] : j.at("K").items()) s.K[label] = k.get<std::vector<std::vector<double>>>();
      return std::make_unique<examples::MarkovReturnModel>(std::move(s));
    }
    bad("unknown model builder '" + builder + "'");
  } catch (const json::exception& e) {
    bad(std::string("model: ") + e.what());
  }
}

ExperimentConfig parse_config(const json& j) {
  try {
    ExperimentConfig c;
    c.environment = std::make_shared<const EnvironmentSpec>(parse_environment(j.at("environment")));
    if (j.at("environment").contains("trajectory_csv")) {
      c.trajectory_csv = j.at("environment").at("trajectory_csv").get<std::string>();
    }
    c.model = j.at("model");
    c.horizon = j.at("horizon").get<std::size_t>();
    c.seed = j.value("seed", std::uint64_t{0});
    c.phi_grid = parse_grid(j.at("phi_grid"), "phi_grid");
    c.w_grid = parse_grid(j.at("w_grid"), "w_grid");
    c.t_list = j.at("t_list").get<std::vector<std::size_t>>();
    if (j.contains("mc")) {
      const json& m = j.at("mc");
      c.mc.n_samples = m.value("n_samples", c.mc.n_samples);
      c.mc.delta = m.value("delta", c.mc.delta);
      c.mc.batch_partition = m.value("batch_partition", c.mc.batch_partition);
      if (m.contains("t")) c.mc.t = m.at("t").get<std::size_t>();
    }
    c.output_dir = j.value("output_dir", std::string("."));
    if (j.contains("route")) c.route = parse_route(j.at("route").get<std::string>());
    if (j.contains("kind")) c.kind = parse_kind(j.at("kind").get<std::string>());
    c.route_tolerance = j.value("route_tolerance", c.route_tolerance);
    if (j.contains("ell")) {
      const json& e = j.at("ell");
      if (e.is_string() && e.get<std::string>() == "-inf") {
        c.ell = TailConstant::minus_infinity();
      } else if (e.is_number()) {
        c.ell = TailConstant::finite(e.get<double>());
      } else {
        bad("ell must be a number or \"-inf\"");
      }
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    bad(e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    bad(path.string() + ": " + e.what());
  }
  auto config = parse_config(j);
  if (config.trajectory_csv && config.trajectory_csv->is_relative()) {
    config.trajectory_csv = path.parent_path() / *config.trajectory_csv;
  }
  return config;
}

EnvironmentTrajectory realize_environment(const ExperimentConfig& config) {
  if (config.trajectory_csv) {
    auto traj = read_trajectory_csv(config.environment, *config.trajectory_csv);
    if (traj.horizon() < config.horizon) bad("trajectory_csv is shorter than the horizon");
    return traj;
  }
  return realize(config.environment, config.seed, config.horizon);
}

}  // namespace qldp::cli
