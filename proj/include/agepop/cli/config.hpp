#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "agepop/acceptance.hpp"
#include "agepop/controllers.hpp"
#include "agepop/error.hpp"
#include "agepop/lyapunov.hpp"
#include "agepop/model.hpp"
#include "agepop/simulate.hpp"

// Run configuration: a JSON document whose sections mirror the library
// modules. Missing keys take defaults, unknown keys are rejected, and every
// scalar can be overridden from the environment as AGEPOP_<SECTION>_<KEY>
// (nested sections join with '_', e.g. AGEPOP_MODEL_PREY_MU_BAR).

namespace agepop::cli {

using json = nlohmann::ordered_json;

struct TableSpec {
  std::vector<double> mu, k, g;
};

struct ModelBlock {
  double max_age = 1.0;
  int n_cells = 400;
  KernelShape prey{};
  KernelShape predator{};
  std::optional<TableSpec> prey_table;
  std::optional<TableSpec> predator_table;
};

// Each law keeps its own gains so that sweeps can mix controllers; the
// measured law reuses the gains of control A.
struct ControllerBlock {
  std::string kind = "A";  // open_loop | A | B | fblin | measured
  GainsA a{0.2, 0.6};
  GainsB b{0.01, 0.13, 0.2};
  double k1 = 1.0;
  double k2 = 2.0;
  std::string sensor = "total";  // measured law: total | interaction
};

struct SimulationBlock {
  double t_final = 20.0;
  std::string ic = "FQ";  // FQ | SQ | equilibrium | eta0 | custom
  std::vector<double> eta0{1.57, -1.41};  // ic = eta0: x_i = x_i* e^{eta_i}, psi = 0
  std::vector<double> custom_prey;      // multipliers on the grid (ic = custom)
  std::vector<double> custom_predator;
  int record_every = 40;
  std::string solver = "direct";  // direct | transformed | both
  std::string coupling = "second_order";  // second_order | held
};

struct LyapunovBlock {
  std::string mode = "auto";  // auto | D | Dbar
  double gamma_factor = 2.0;
  std::optional<double> gamma1, gamma2, sigma1, sigma2, varpi;
};

struct OutputBlock {
  std::string directory = "out";
  bool profiles = true;
  bool plot = false;
};

struct SweepBlock {
  std::vector<std::string> controller{"A", "B"};
  std::vector<std::string> ic{"FQ", "SQ"};
  // Gain values swept for the laws that use them (A, B, measured); an empty
  // list keeps the controller block value.
  std::vector<double> eps;
  std::vector<double> beta;
  std::vector<double> delta;
  int threads = 0;  // 0: hardware concurrency
};

struct VerifyBlock {
  int n_cells = 400;
};

struct RunConfig {
  ModelBlock model;
  double u_star = 0.15;
  ControllerBlock controller;
  SimulationBlock simulation;
  LyapunovBlock lyapunov;
  OutputBlock output;
  SweepBlock sweep;
  VerifyBlock verify;
};

// ------------------------------------------------------------------ JSON mapping

namespace detail {

inline json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json shape_json(const KernelShape& s) {
  return json{{"mu_bar", s.mu_bar}, {"k_bar", s.k_bar}, {"g_bar", s.g_bar}};
}

inline json table_json(const std::optional<TableSpec>& t) {
  if (!t) return json(nullptr);
  return json{{"mu", t->mu}, {"k", t->k}, {"g", t->g}};
}

}  // namespace detail

inline json to_json(const RunConfig& c) {
  json j;
  j["model"] = {{"max_age", c.model.max_age},
                {"n_cells", c.model.n_cells},
                {"prey", detail::shape_json(c.model.prey)},
                {"predator", detail::shape_json(c.model.predator)},
                {"prey_table", detail::table_json(c.model.prey_table)},
                {"predator_table", detail::table_json(c.model.predator_table)}};
  j["equilibrium"] = {{"u_star", c.u_star}};
  j["controller"] = {
      {"kind", c.controller.kind},
      {"A", {{"eps", c.controller.a.eps}, {"beta", c.controller.a.beta}}},
      {"B", {{"eps", c.controller.b.eps}, {"beta", c.controller.b.beta}, {"delta", c.controller.b.delta}}},
      {"fblin", {{"k1", c.controller.k1}, {"k2", c.controller.k2}}},
      {"measured", {{"sensor", c.controller.sensor}}}};
  j["simulation"] = {{"t_final", c.simulation.t_final},
                     {"ic", c.simulation.ic},
                     {"eta0", c.simulation.eta0},
                     {"custom_prey", c.simulation.custom_prey},
                     {"custom_predator", c.simulation.custom_predator},
                     {"record_every", c.simulation.record_every},
                     {"solver", c.simulation.solver},
                     {"coupling", c.simulation.coupling}};
  j["lyapunov"] = {{"mode", c.lyapunov.mode},
                   {"gamma_factor", c.lyapunov.gamma_factor},
                   {"gamma1", detail::opt(c.lyapunov.gamma1)},
                   {"gamma2", detail::opt(c.lyapunov.gamma2)},
                   {"sigma1", detail::opt(c.lyapunov.sigma1)},
                   {"sigma2", detail::opt(c.lyapunov.sigma2)},
                   {"varpi", detail::opt(c.lyapunov.varpi)}};
  j["output"] = {{"directory", c.output.directory}, {"profiles", c.output.profiles},
                 {"plot", c.output.plot}};
  j["sweep"] = {{"controller", c.sweep.controller}, {"ic", c.sweep.ic},
                {"eps", c.sweep.eps},               {"beta", c.sweep.beta},
                {"delta", c.sweep.delta},           {"threads", c.sweep.threads}};
  j["verify"] = {{"n_cells", c.verify.n_cells}};
  return j;
}

namespace detail {

class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  const json& at(const std::string& path) const {
    const json* node = &root_;
    std::string part;
    std::istringstream in(path);
    while (std::getline(in, part, '.')) node = &node->at(part);
    return *node;
  }

  template <typename T>
  T get(const std::string& path) const {
    if constexpr (std::is_same_v<T, int>) {
      if (!at(path).is_number_integer()) {
        throw ConfigError("config: key '" + path + "' must be an integer");
      }
    }
    try {
      return at(path).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config: key '" + path + "' has the wrong type (" + e.what() + ")");
    }
  }

  std::optional<double> get_opt(const std::string& path) const {
    const json& v = at(path);
    if (v.is_null()) return std::nullopt;
    return get<double>(path);
  }

  std::optional<TableSpec> table(const std::string& path) const {
    const json& v = at(path);
    if (v.is_null()) return std::nullopt;
    return TableSpec{get<std::vector<double>>(path + ".mu"), get<std::vector<double>>(path + ".k"),
                     get<std::vector<double>>(path + ".g")};
  }

  KernelShape shape(const std::string& path) const {
    return {get<double>(path + ".mu_bar"), get<double>(path + ".k_bar"), get<double>(path + ".g_bar")};
  }

 private:
  const json& root_;
};

inline void reject_unknown(const json& user, const json& schema, const std::string& where) {
  if (!user.is_object()) return;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = where.empty() ? it.key() : where + "." + it.key();
    if (!schema.is_object() || !schema.contains(it.key())) {
      throw ConfigError("config: unknown key '" + path + "'");
    }
    const json& s = schema.at(it.key());
    // Tables default to null but are objects when given.
    if (s.is_object()) reject_unknown(it.value(), s, path);
  }
}

/// Recursive overlay of user values onto the defaults (objects merge key by
/// key, everything else replaces). Unlike JSON merge-patch, null is a value.
inline void overlay(json& base, const json& user) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    json& slot = base[it.key()];
    if (slot.is_object() && it.value().is_object()) {
      overlay(slot, it.value());
    } else {
      if (slot.is_object() && !it.value().is_object()) {
        throw ConfigError("config: key '" + it.key() + "' must be an object");
      }
      slot = it.value();
    }
  }
}

inline std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

inline json parse_env_value(const std::string& raw, const json& current, const std::string& var) {
  try {
    if (current.is_boolean()) {
      if (raw == "1" || raw == "true") return true;
      if (raw == "0" || raw == "false") return false;
      throw ConfigError("expected a boolean");
    }
    if (current.is_number_integer()) {
      std::size_t used = 0;
      const long long v = std::stoll(raw, &used);
      if (used != raw.size()) throw ConfigError("expected an integer");
      return v;
    }
    if (current.is_number() || current.is_null()) {
      std::size_t used = 0;
      const double v = std::stod(raw, &used);
      if (used != raw.size()) throw ConfigError("expected a number");
      return v;
    }
    if (current.is_string()) return raw;
    return json::parse(raw);  // arrays
  } catch (const std::exception& e) {
    throw ConfigError("environment override " + var + "='" + raw + "': " + e.what());
  }
}

inline void apply_env(json& node, const std::string& prefix) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string var = prefix + "_" + upper(it.key());
    if (it.value().is_object()) {
      apply_env(it.value(), var);
      continue;
    }
    if (const char* raw = std::getenv(var.c_str())) it.value() = parse_env_value(raw, it.value(), var);
  }
}

}  // namespace detail

inline void validate(const RunConfig& c);

/// Builds a configuration from a (possibly partial) JSON document, applying
/// defaults and, when `use_env` is set, AGEPOP_* environment overrides.
inline RunConfig from_json(const json& user, bool use_env = true) {
  const json defaults = to_json(RunConfig{});
  if (!user.is_null() && !user.is_object()) throw ConfigError("config: top level must be an object");
  if (!user.is_null()) detail::reject_unknown(user, defaults, "");
  json merged = defaults;
  if (!user.is_null()) detail::overlay(merged, user);
  if (use_env) detail::apply_env(merged, "AGEPOP");
  const detail::Reader r(merged);

  RunConfig c;
  c.model.max_age = r.get<double>("model.max_age");
  c.model.n_cells = r.get<int>("model.n_cells");
  c.model.prey = r.shape("model.prey");
  c.model.predator = r.shape("model.predator");
  c.model.prey_table = r.table("model.prey_table");
  c.model.predator_table = r.table("model.predator_table");
  c.u_star = r.get<double>("equilibrium.u_star");
  c.controller.kind = r.get<std::string>("controller.kind");
  c.controller.a = {r.get<double>("controller.A.eps"), r.get<double>("controller.A.beta")};
  c.controller.b = {r.get<double>("controller.B.eps"), r.get<double>("controller.B.beta"),
                    r.get<double>("controller.B.delta")};
  c.controller.k1 = r.get<double>("controller.fblin.k1");
  c.controller.k2 = r.get<double>("controller.fblin.k2");
  c.controller.sensor = r.get<std::string>("controller.measured.sensor");
  c.simulation.t_final = r.get<double>("simulation.t_final");
  c.simulation.ic = r.get<std::string>("simulation.ic");
  c.simulation.eta0 = r.get<std::vector<double>>("simulation.eta0");
  c.simulation.custom_prey = r.get<std::vector<double>>("simulation.custom_prey");
  c.simulation.custom_predator = r.get<std::vector<double>>("simulation.custom_predator");
  c.simulation.record_every = r.get<int>("simulation.record_every");
  c.simulation.solver = r.get<std::string>("simulation.solver");
  c.simulation.coupling = r.get<std::string>("simulation.coupling");
  c.lyapunov.mode = r.get<std::string>("lyapunov.mode");
  c.lyapunov.gamma_factor = r.get<double>("lyapunov.gamma_factor");
  c.lyapunov.gamma1 = r.get_opt("lyapunov.gamma1");
  c.lyapunov.gamma2 = r.get_opt("lyapunov.gamma2");
  c.lyapunov.sigma1 = r.get_opt("lyapunov.sigma1");
  c.lyapunov.sigma2 = r.get_opt("lyapunov.sigma2");
  c.lyapunov.varpi = r.get_opt("lyapunov.varpi");
  c.output.directory = r.get<std::string>("output.directory");
  c.output.profiles = r.get<bool>("output.profiles");
  c.output.plot = r.get<bool>("output.plot");
  c.sweep.controller = r.get<std::vector<std::string>>("sweep.controller");
  c.sweep.ic = r.get<std::vector<std::string>>("sweep.ic");
  c.sweep.eps = r.get<std::vector<double>>("sweep.eps");
  c.sweep.beta = r.get<std::vector<double>>("sweep.beta");
  c.sweep.delta = r.get<std::vector<double>>("sweep.delta");
  c.sweep.threads = r.get<int>("sweep.threads");
  c.verify.n_cells = r.get<int>("verify.n_cells");
  validate(c);
  return c;
}

inline RunConfig load_config(const std::string& path, bool use_env = true) {
  if (path.empty()) return from_json(json(nullptr), use_env);
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json user;
  try {
    user = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(user, use_env);
}

// ------------------------------------------------------------------ validation and builders

namespace detail {

inline void one_of(const std::string& value, std::initializer_list<const char*> allowed,
                   const std::string& key) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw ConfigError("config: " + key + " = '" + value + "' must be one of {" + list + "}");
}

}  // namespace detail

inline void validate(const RunConfig& c) {
  detail::one_of(c.controller.kind, {"open_loop", "A", "B", "fblin", "measured"}, "controller.kind");
  detail::one_of(c.controller.sensor, {"total", "interaction"}, "controller.measured.sensor");
  detail::one_of(c.simulation.ic, {"FQ", "SQ", "equilibrium", "eta0", "custom"}, "simulation.ic");
  if (c.simulation.eta0.size() != 2) throw ConfigError("config: simulation.eta0 must have two entries");
  detail::one_of(c.simulation.solver, {"direct", "transformed", "both"}, "simulation.solver");
  detail::one_of(c.simulation.coupling, {"second_order", "held"}, "simulation.coupling");
  detail::one_of(c.lyapunov.mode, {"auto", "D", "Dbar"}, "lyapunov.mode");
  for (const auto& k : c.sweep.controller) detail::one_of(k, {"open_loop", "A", "B", "fblin", "measured"}, "sweep.controller");
  for (const auto& k : c.sweep.ic) detail::one_of(k, {"FQ", "SQ", "equilibrium", "eta0"}, "sweep.ic");
  if (c.model.n_cells < 1) throw ConfigError("config: model.n_cells must be >= 1");
  if (c.verify.n_cells < 1) throw ConfigError("config: verify.n_cells must be >= 1");
  if (!(c.simulation.t_final > 0.0)) throw ConfigError("config: simulation.t_final must be positive");
  if (c.simulation.record_every < 1) throw ConfigError("config: simulation.record_every must be >= 1");
  if (!(c.lyapunov.gamma_factor > 1.0)) {
    throw ConfigError("config: lyapunov.gamma_factor must exceed 1 (gamma_i > their lower bounds)");
  }
  if (c.sweep.threads < 0) throw ConfigError("config: sweep.threads must be >= 0");
  if (c.simulation.ic == "custom" &&
      (c.simulation.custom_prey.size() != static_cast<std::size_t>(c.model.n_cells) + 1 ||
       c.simulation.custom_predator.size() != static_cast<std::size_t>(c.model.n_cells) + 1)) {
    throw ConfigError("config: simulation.custom_prey/custom_predator need n_cells + 1 = " +
                      std::to_string(c.model.n_cells + 1) + " multipliers each");
  }
}

inline AgeGrid make_grid(const RunConfig& c) { return AgeGrid(c.model.max_age, c.model.n_cells); }

inline KernelSet make_kernels(const RunConfig& c, const AgeGrid& grid) {
  auto species = [&](const std::optional<TableSpec>& t, const KernelShape& s, const char* name) {
    if (!t) return build_species_kernels(s, grid);
    if (t->mu.size() != grid.size() || t->k.size() != grid.size() || t->g.size() != grid.size()) {
      throw ConfigError(std::string("config: model.") + name + "_table needs n_cells + 1 = " +
                        std::to_string(grid.size()) + " samples per kernel");
    }
    return SpeciesKernels{GridFn(t->mu), GridFn(t->k), GridFn(t->g), std::nullopt};
  };
  SpeciesKernels prey = species(c.model.prey_table, c.model.prey, "prey");
  SpeciesKernels pred = species(c.model.predator_table, c.model.predator, "predator");
  KernelSet ks{{std::move(prey), std::move(pred)}};
  validate_kernels(ks, grid);
  return ks;
}

inline ControllerSpec make_controller(const ControllerBlock& b, const Scenario& sc) {
  if (b.kind == "open_loop") return OpenLoop{};
  if (b.kind == "A") return ControlA{b.a};
  if (b.kind == "B") return ControlB{b.b};
  if (b.kind == "fblin") return FeedbackLinearizing{b.k1, b.k2};
  const AgeGrid& grid = sc.eq.grid;
  const GridFn c1 = b.sensor == "total" ? GridFn::constant(grid, 1.0) : sc.kernels[kPredator].g;
  const GridFn c2 = b.sensor == "total" ? GridFn::constant(grid, 1.0) : sc.kernels[kPrey].g;
  return MeasuredA{b.a, sensor_equilibrium(c1, c2, sc.kernels, sc.eq)};
}

inline IcSpec make_ic(const std::string& name, const SimulationBlock& s, const AgeGrid& grid) {
  if (name == "FQ") return IcFourthQuadrant{};
  if (name == "SQ") return IcSecondQuadrant{};
  if (name == "equilibrium") return IcEquilibrium{};
  if (name == "eta0") {
    return IcTransformed{{s.eta0[0], s.eta0[1]}, {HistoryBuffer::zeros(grid), HistoryBuffer::zeros(grid)}};
  }
  return IcMultipliers{{GridFn(s.custom_prey), GridFn(s.custom_predator)}};
}

/// Lyapunov configuration for the controller (mode D for control A and the
/// measured law, Dbar for control B), with the configured overrides applied.
/// Empty for controllers without an associated CLF analysis.
inline std::optional<LyapConfig> make_lyap(const RunConfig& c, const ControllerBlock& b,
                                           const Scenario& sc) {
  std::string mode = c.lyapunov.mode;
  if (mode == "auto") {
    if (b.kind == "A" || b.kind == "measured") mode = "D";
    else if (b.kind == "B") mode = "Dbar";
    else return std::nullopt;
  }
  const std::array<SigmaResult, 2> sig{find_sigma(sc.eq.ktilde[0], sc.eq.grid),
                                       find_sigma(sc.eq.ktilde[1], sc.eq.grid)};
  LyapConfig lc;
  if (mode == "D") {
    b.a.validate();
    lc = lyap_config_for_A(b.a, sc.model, sig, c.lyapunov.gamma_factor);
  } else {
    b.b.validate(sc.model);
    lc = lyap_config_for_B(b.b, sc.model, sig, c.lyapunov.gamma_factor);
    if (c.lyapunov.varpi) {
      lc.varpi = *c.lyapunov.varpi;
      const auto lb = lc.gamma_lower_bounds(sc.model);
      lc.gamma = {c.lyapunov.gamma_factor * lb[0], c.lyapunov.gamma_factor * lb[1]};
    }
  }
  if (c.lyapunov.gamma1) lc.gamma[0] = *c.lyapunov.gamma1;
  if (c.lyapunov.gamma2) lc.gamma[1] = *c.lyapunov.gamma2;
  if (c.lyapunov.sigma1) lc.sigma[0] = *c.lyapunov.sigma1;
  if (c.lyapunov.sigma2) lc.sigma[1] = *c.lyapunov.sigma2;
  lc.validate(sc.model);
  return lc;
}

inline SimConfig make_sim(const RunConfig& c, const Scenario& sc, const ControllerBlock& b,
                          const std::string& ic) {
  SimConfig s;
  s.kernels = sc.kernels;
  s.u_star = c.u_star;
  s.grid = sc.eq.grid;
  s.t_final = c.simulation.t_final;
  s.controller = make_controller(b, sc);
  s.ic = make_ic(ic, c.simulation, sc.eq.grid);
  s.record_every = c.simulation.record_every;
  s.coupling = c.simulation.coupling == "held" ? Coupling::Held : Coupling::SecondOrder;
  s.keep_snapshots = c.output.profiles;
  s.lyap = make_lyap(c, b, sc);
  return s;
}

inline acceptance::Options make_acceptance_options(const RunConfig& c) {
  acceptance::Options o;
  o.max_age = c.model.max_age;
  o.n_cells = c.verify.n_cells;
  o.u_star = c.u_star;
  o.prey = c.model.prey;
  o.predator = c.model.predator;
  o.t_final = std::min(20.0, c.simulation.t_final);
  o.gains_a = c.controller.a;
  o.gains_b = c.controller.b;
  o.gains_a.validate();
  return o;
}

}  // namespace agepop::cli
