#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "agepop/acceptance.hpp"
#include "agepop/cli/config.hpp"
#include "agepop/cli/csv.hpp"
#include "agepop/cli/svg.hpp"
#include "agepop/equilibrium.hpp"
#include "agepop/lyapunov.hpp"
#include "agepop/roa.hpp"
#include "agepop/simulate.hpp"
#include "agepop/transform.hpp"

// Scenario execution behind the `agepop` subcommands. Each command writes its
// CSV (and optional SVG) files into the output directory and returns a JSON
// summary, which is also written next to the data.

namespace agepop::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitVerification = 4;

/// Exit code for a library error.
inline int exit_code_for(const Error& e) {
  return dynamic_cast<const ConfigError*>(&e) != nullptr ? kExitConfig : kExitNumerical;
}

namespace detail {

/// JSON number, or null for non-finite values (JSON has no NaN).
inline json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json jpair(const std::array<double, 2>& v) { return json::array({jnum(v[0]), jnum(v[1])}); }

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

inline void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

inline json lyap_json(const LyapConfig& c) {
  return {{"mode", c.mode == RegionMode::D ? "D" : "Dbar"},
          {"eps", c.eps},
          {"beta", c.beta},
          {"delta", c.delta},
          {"gamma", jpair(c.gamma)},
          {"sigma", jpair(c.sigma)},
          {"kappa", jpair(c.kappa)},
          {"varpi", c.varpi}};
}

inline json gains_json(const ControllerSpec& spec) {
  if (const auto* a = std::get_if<ControlA>(&spec)) return {{"eps", a->gains.eps}, {"beta", a->gains.beta}};
  if (const auto* b = std::get_if<ControlB>(&spec)) {
    return {{"eps", b->gains.eps}, {"beta", b->gains.beta}, {"delta", b->gains.delta}};
  }
  if (const auto* f = std::get_if<FeedbackLinearizing>(&spec)) return {{"k1", f->k1}, {"k2", f->k2}};
  if (const auto* m = std::get_if<MeasuredA>(&spec)) {
    return {{"eps", m->gains.eps}, {"beta", m->gains.beta}, {"y_star", jpair(m->sensors.y_star)}};
  }
  return json::object();
}

inline void write_trajectory_csv(const fs::path& path, const Trajectory& t) {
  CsvWriter w(path, {"t", "eta1", "eta2", "u", "V0", "V1", "V", "G1", "G2"});
  for (std::size_t k = 0; k < t.size(); ++k) {
    w.row({t.times[k], t.eta[k][0], t.eta[k][1], t.u[k], t.v0[k], t.v1[k], t.v[k], t.g1[k], t.g2[k]});
  }
}

inline void write_profiles(const fs::path& dir, const Trajectory& t, const Equilibrium& eq) {
  CsvWriter index(dir / "profiles_index.csv", {"k", "t"});
  for (std::size_t k = 0; k < t.snapshots.size(); ++k) {
    const PopulationState& s = t.snapshots[k];
    index.row({static_cast<double>(k), s.t});
    CsvWriter w(dir / ("profiles_t" + std::to_string(k) + ".csv"), {"a", "x1", "x2", "x1_star", "x2_star"});
    for (std::size_t j = 0; j < eq.grid.size(); ++j) {
      w.row({eq.grid.node(j), s.x[0][j], s.x[1][j], eq.x_star[0][j], eq.x_star[1][j]});
    }
  }
}

inline Series column(const std::string& label, const std::vector<double>& x, const std::vector<double>& y) {
  return {label, x, y, false};
}

inline void plot_trajectory(const fs::path& dir, const Trajectory& t, const Equilibrium& eq,
                            const std::string& tag) {
  std::vector<double> e1, e2;
  for (const auto& e : t.eta) e1.push_back(e[0]), e2.push_back(e[1]);
  write_svg(dir / "eta.svg", {"eta(t), " + tag, "t", "eta", {column("eta1", t.times, e1), column("eta2", t.times, e2)}});
  write_svg(dir / "u.svg", {"dilution u(t), " + tag, "t", "u",
                            {column("u", t.times, t.u), column("u*", {t.times.front(), t.times.back()}, {eq.u_star, eq.u_star})}});
  write_svg(dir / "lyapunov.svg", {"V0, V1, V along the run, " + tag, "t", "value",
                                   {column("V0", t.times, t.v0), column("V1", t.times, t.v1), column("V", t.times, t.v)}});
  if (t.snapshots.empty()) return;
  // Age slices of x_i / x_i* at (up to) six evenly spaced snapshots.
  const std::size_t n = t.snapshots.size();
  const std::size_t stride = std::max<std::size_t>(1, (n - 1) / 5 + ((n - 1) % 5 != 0));
  std::vector<double> ages(eq.grid.size());
  for (std::size_t j = 0; j < ages.size(); ++j) ages[j] = eq.grid.node(j);
  for (std::size_t i = 0; i < 2; ++i) {
    Chart c{"x" + std::to_string(i + 1) + "(t, a) / x" + std::to_string(i + 1) + "*(a) slices, " + tag, "age a",
            "ratio", {}};
    for (std::size_t k = 0; k < n; k += stride) {
      std::vector<double> r(ages.size());
      for (std::size_t j = 0; j < r.size(); ++j) r[j] = t.snapshots[k].x[i][j] / eq.x_star[i][j];
      std::ostringstream label;
      label << "t = " << t.snapshots[k].t;
      c.series.push_back(column(label.str(), ages, r));
    }
    write_svg(dir / ("profiles_x" + std::to_string(i + 1) + ".svg"), c);
  }
}

struct TrajectoryStats {
  double min_u = 0.0, max_u = 0.0;
  Eta final_eta{};
  double final_norm = 0.0;
  double max_norm_last_quarter = 0.0;
  double v0_drift = 0.0;  // max |V0(t) - V0(0)| / V0(0)
};

inline TrajectoryStats stats(const Trajectory& t) {
  TrajectoryStats s;
  s.min_u = *std::min_element(t.u.begin(), t.u.end());
  s.max_u = *std::max_element(t.u.begin(), t.u.end());
  s.final_eta = t.eta.back();
  s.final_norm = std::hypot(s.final_eta[0], s.final_eta[1]);
  const double t_from = 0.75 * t.times.back();
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t.times[k] >= t_from) s.max_norm_last_quarter = std::max(s.max_norm_last_quarter, std::hypot(t.eta[k][0], t.eta[k][1]));
    if (t.v0.front() > 0.0) s.v0_drift = std::max(s.v0_drift, std::abs(t.v0[k] - t.v0.front()) / t.v0.front());
  }
  return s;
}

inline json stats_json(const TrajectoryStats& s) {
  return {{"min_u", s.min_u},
          {"max_u", s.max_u},
          {"u_positive", s.min_u > 0.0},
          {"final_eta", jpair(s.final_eta)},
          {"final_norm", s.final_norm},
          {"max_norm_last_quarter", s.max_norm_last_quarter},
          {"v0_relative_drift", s.v0_drift}};
}

}  // namespace detail

/// Scenario (kernels, equilibrium, adjoint data) for a configuration.
inline Scenario scenario_for(const RunConfig& c) {
  const AgeGrid grid = make_grid(c);
  return prepare_scenario(make_kernels(c, grid), c.u_star, grid);
}

// ------------------------------------------------------------------ equilibrium

inline json cmd_equilibrium(const RunConfig& c, const fs::path& out, bool plot) {
  detail::prepare_dir(out);
  const Scenario sc = scenario_for(c);
  const Equilibrium& eq = sc.eq;
  {
    CsvWriter w(out / "equilibrium.csv", {"a", "x1_star", "x2_star", "pi0_1", "pi0_2", "ktilde_1", "ktilde_2"});
    for (std::size_t j = 0; j < eq.grid.size(); ++j) {
      w.row({eq.grid.node(j), eq.x_star[0][j], eq.x_star[1][j], sc.adj[0].pi0[j], sc.adj[1].pi0[j],
             eq.ktilde[0][j], eq.ktilde[1][j]});
    }
  }
  json j = {{"command", "equilibrium"},
            {"n_cells", c.model.n_cells},
            {"max_age", c.model.max_age},
            {"u_star", eq.u_star},
            {"zeta", detail::jpair(eq.zeta)},
            {"lambda", detail::jpair(eq.lambda)},
            {"x0_star", detail::jpair(eq.x0_star)},
            {"feasible_u_star", json::array({0.0, eq.max_u_star()})},
            {"identity_residual", json::array({eq.zeta[0] - eq.lambda[1] - eq.u_star,
                                               eq.zeta[1] - 1.0 / eq.lambda[0] - eq.u_star})}};
  detail::write_json(out / "equilibrium.json", j);
  if (plot) {
    std::vector<double> a(eq.grid.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = eq.grid.node(k);
    write_svg(out / "equilibrium.svg", {"equilibrium age profiles", "age a", "density",
                                        {detail::column("x1*", a, eq.x_star[0].vec()),
                                         detail::column("x2*", a, eq.x_star[1].vec())}});
  }
  return j;
}

// ------------------------------------------------------------------ simulate

/// One simulation run for the given controller block and initial condition.
inline json run_simulation(const RunConfig& c, const Scenario& sc, const ControllerBlock& b,
                           const std::string& ic, const fs::path& out, bool plot) {
  detail::prepare_dir(out);
  const SimConfig sim = make_sim(c, sc, b, ic);
  const std::string& solver = c.simulation.solver;
  json j = {{"command", "simulate"},
            {"controller", controller_name(sim.controller)},
            {"gains", detail::gains_json(sim.controller)},
            {"ic", ic},
            {"solver", solver},
            {"coupling", c.simulation.coupling},
            {"n_cells", c.model.n_cells},
            {"dt", sim.step()},
            {"t_final", c.simulation.t_final},
            {"u_star", c.u_star},
            {"lambda", detail::jpair(sc.eq.lambda)}};
  if (const auto* bb = std::get_if<ControlB>(&sim.controller)) {
    j["control_lower_bound"] = bb->gains.lower_bound(sc.model);
  }
  j["lyapunov"] = sim.lyap ? detail::lyap_json(*sim.lyap) : json(nullptr);

  const std::string tag = controller_name(sim.controller) + ", IC " + ic;
  if (solver == "direct" || solver == "both") {
    const Trajectory t = simulate_direct(sim, sc);
    detail::write_trajectory_csv(out / "trajectory.csv", t);
    if (c.output.profiles) detail::write_profiles(out, t, sc.eq);
    if (plot) detail::plot_trajectory(out, t, sc.eq, tag);
    j["direct"] = detail::stats_json(detail::stats(t));
    if (solver == "both") {
      const Trajectory tt = simulate_transformed(sim, sc);
      detail::write_trajectory_csv(out / "trajectory_transformed.csv", tt);
      j["transformed"] = detail::stats_json(detail::stats(tt));
      double worst = 0.0;
      for (std::size_t s = 0; s < std::min(t.snapshots.size(), tt.snapshots.size()); ++s) {
        for (std::size_t i = 0; i < 2; ++i) {
          for (std::size_t k = 0; k < sc.eq.grid.size(); ++k) {
            const double a = t.snapshots[s].x[i][k], b2 = tt.snapshots[s].x[i][k];
            worst = std::max(worst, std::abs(a - b2) / b2);
          }
        }
      }
      j["cross_validation_max_rel_diff"] = c.output.profiles ? detail::jnum(worst) : json(nullptr);
    }
  } else {
    const Trajectory t = simulate_transformed(sim, sc);
    detail::write_trajectory_csv(out / "trajectory.csv", t);
    if (c.output.profiles) detail::write_profiles(out, t, sc.eq);
    if (plot) detail::plot_trajectory(out, t, sc.eq, tag);
    j["transformed"] = detail::stats_json(detail::stats(t));
  }
  detail::write_json(out / "summary.json", j);
  return j;
}

inline json cmd_simulate(const RunConfig& c, const fs::path& out, bool plot) {
  const Scenario sc = scenario_for(c);
  return run_simulation(c, sc, c.controller, c.simulation.ic, out, plot);
}

// ------------------------------------------------------------------ roa

/// Lyapunov configuration for the ROA command: the controller kind selects
/// the mode unless it is given explicitly.
inline LyapConfig roa_config(const RunConfig& c, const Scenario& sc) {
  ControllerBlock b = c.controller;
  if (c.lyapunov.mode == "D") b.kind = "A";
  if (c.lyapunov.mode == "Dbar") b.kind = "B";
  const auto lc = make_lyap(c, b, sc);
  if (!lc) {
    throw ConfigError("roa: controller.kind = '" + c.controller.kind +
                      "' has no region analysis; use A, B or measured, or set lyapunov.mode to D or Dbar");
  }
  return *lc;
}

inline json cmd_roa(const RunConfig& c, const fs::path& out, bool plot) {
  detail::prepare_dir(out);
  const Scenario sc = scenario_for(c);
  const LyapConfig lc = roa_config(c, sc);
  const RoaEstimate est = roa_estimate(lc, sc.model);
  const auto contour = level_set_contour(est.c_star, lc.eps, sc.model);
  const MembershipReport mem = roa_membership_check(est.c_star, lc, sc.model);
  {
    CsvWriter w(out / "roa.csv", {"piece", "eta1", "eta2", "V1"});
    for (const auto& piece : est.pieces) {
      for (std::size_t k = 0; k < piece.points.size(); ++k) {
        w.labeled_row(piece.label, {piece.points[k][0], piece.points[k][1], piece.v1[k]});
      }
    }
  }
  {
    CsvWriter w(out / "levelset.csv", {"eta1", "eta2"});
    for (const Eta& e : contour) w.row({e[0], e[1]});
  }
  json j = {{"command", "roa"},
            {"lyapunov", detail::lyap_json(lc)},
            {"c_star", est.c_star},
            {"argmin", detail::jpair(est.argmin)},
            {"active", est.active},
            {"H", detail::jpair(est.H)},
            {"membership", {{"grid", 400}, {"inside_level", mem.inside_level}, {"violations", mem.violations}}}};
  detail::write_json(out / "roa.json", j);
  if (plot) {
    Chart chart{"region boundary and level set V1 = c*", "eta1", "eta2", {}, true};
    for (const auto& piece : est.pieces) {
      // Clip the long boundary rays to a window around the level set.
      Series s{piece.label, {}, {}, false};
      for (const Eta& e : piece.points) {
        if (std::abs(e[0]) <= 3.0 * std::max(std::abs(mem.box[0]), std::abs(mem.box[1])) &&
            std::abs(e[1]) <= 3.0 * std::max(std::abs(mem.box[2]), std::abs(mem.box[3]))) {
          s.x.push_back(e[0]);
          s.y.push_back(e[1]);
        }
      }
      chart.series.push_back(std::move(s));
    }
    Series level{"V1 = c*", {}, {}, true};
    for (const Eta& e : contour) level.x.push_back(e[0]), level.y.push_back(e[1]);
    chart.series.push_back(std::move(level));
    write_svg(out / "roa.svg", chart);
  }
  return j;
}

// ------------------------------------------------------------------ sweep

struct SweepRun {
  std::size_t index = 0;
  ControllerBlock controller;
  std::string ic;
};

/// Cartesian product of the sweep lists. Gains only vary for the laws that
/// use them, so open-loop and feedback-linearizing runs are not duplicated.
inline std::vector<SweepRun> sweep_runs(const RunConfig& c) {
  auto or_default = [](const std::vector<double>& v, double d) { return v.empty() ? std::vector<double>{d} : v; };
  std::vector<SweepRun> runs;
  for (const auto& kind : c.sweep.controller) {
    std::vector<ControllerBlock> blocks;
    ControllerBlock base = c.controller;
    base.kind = kind;
    if (kind == "A" || kind == "measured") {
      for (double e : or_default(c.sweep.eps, base.a.eps)) {
        for (double b : or_default(c.sweep.beta, base.a.beta)) {
          ControllerBlock cb = base;
          cb.a = {e, b};
          blocks.push_back(cb);
        }
      }
    } else if (kind == "B") {
      for (double e : or_default(c.sweep.eps, base.b.eps)) {
        for (double b : or_default(c.sweep.beta, base.b.beta)) {
          for (double d : or_default(c.sweep.delta, base.b.delta)) {
            ControllerBlock cb = base;
            cb.b = {e, b, d};
            blocks.push_back(cb);
          }
        }
      }
    } else {
      blocks.push_back(base);
    }
    for (const auto& cb : blocks) {
      for (const auto& ic : c.sweep.ic) runs.push_back({runs.size(), cb, ic});
    }
  }
  return runs;
}

struct SweepResult {
  std::string status = "ok";  // ok | config_error | numerical_error
  std::string message;
  json summary;
};

inline json cmd_sweep(const RunConfig& c, const fs::path& out, bool plot, int* exit_code = nullptr) {
  detail::prepare_dir(out);
  const Scenario sc = scenario_for(c);  // read-only, shared by all runs
  const auto runs = sweep_runs(c);
  std::vector<SweepResult> results(runs.size());
  std::atomic<std::size_t> next{0};
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_threads =
      std::min<std::size_t>(runs.size(), c.sweep.threads > 0 ? static_cast<std::size_t>(c.sweep.threads) : hw);

  auto run_dir = [&](const SweepRun& r) {
    std::ostringstream name;
    name << "run_" << std::setw(3) << std::setfill('0') << r.index << "_" << r.controller.kind << "_" << r.ic;
    return out / name.str();
  };
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      SweepResult& res = results[i];
      try {
        res.summary = run_simulation(c, sc, runs[i].controller, runs[i].ic, run_dir(runs[i]), plot);
      } catch (const ConfigError& e) {
        res.status = "config_error";
        res.message = e.what();
      } catch (const Error& e) {
        res.status = "numerical_error";
        res.message = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // Written after all runs finish, in run order, so the table is deterministic.
  std::ofstream csv(out / "sweep.csv");
  if (!csv) throw Error("cannot open sweep.csv for writing");
  csv << "index,controller,ic,eps,beta,delta,status,min_u,max_u,final_norm,max_norm_last_quarter,directory\n";
  json list = json::array();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  int code = kExitOk;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const SweepRun& r = runs[i];
    const SweepResult& res = results[i];
    double eps = nan, beta = nan, delta = nan;
    if (r.controller.kind == "A" || r.controller.kind == "measured") eps = r.controller.a.eps, beta = r.controller.a.beta;
    if (r.controller.kind == "B") eps = r.controller.b.eps, beta = r.controller.b.beta, delta = r.controller.b.delta;
    double min_u = nan, max_u = nan, fn = nan, fq = nan;
    if (res.status == "ok") {
      const json& s = res.summary.contains("direct") ? res.summary["direct"] : res.summary["transformed"];
      min_u = s["min_u"].get<double>();
      max_u = s["max_u"].get<double>();
      fn = s["final_norm"].get<double>();
      fq = s["max_norm_last_quarter"].get<double>();
    } else {
      code = std::max(code, res.status == "config_error" ? kExitConfig : kExitNumerical);
    }
    const std::string dir = run_dir(r).filename().string();
    csv << r.index << ',' << r.controller.kind << ',' << r.ic << ',' << fmt17(eps) << ',' << fmt17(beta) << ','
        << fmt17(delta) << ',' << res.status << ',' << fmt17(min_u) << ',' << fmt17(max_u) << ',' << fmt17(fn)
        << ',' << fmt17(fq) << ',' << dir << '\n';
    list.push_back({{"index", r.index},
                    {"controller", r.controller.kind},
                    {"ic", r.ic},
                    {"status", res.status},
                    {"message", res.message},
                    {"directory", dir}});
  }
  json j = {{"command", "sweep"}, {"runs", list.size()}, {"threads", n_threads}, {"results", list}};
  detail::write_json(out / "sweep.json", j);
  if (exit_code != nullptr) *exit_code = code;
  return j;
}

// ------------------------------------------------------------------ verify

/// Runs the acceptance criteria; prints one line per criterion to `log`.
inline json cmd_verify(const RunConfig& c, const fs::path& out, std::ostream& log, bool* all_passed) {
  const acceptance::Options o = make_acceptance_options(c);
  detail::prepare_dir(out);
  json list = json::array();
  bool ok = true;
  for (std::size_t i = 0; i < acceptance::all_criteria().size(); ++i) {
    const acceptance::Verdict v = acceptance::run(i, o);
    log << acceptance::format_line(v) << '\n' << std::flush;
    ok = ok && v.passed();
    list.push_back({{"id", v.id}, {"name", v.name}, {"status", acceptance::status_name(v.status)}, {"detail", v.detail}});
  }
  json j = {{"command", "verify"}, {"n_cells", o.n_cells}, {"all_passed", ok}, {"criteria", list}};
  detail::write_json(out / "verify.json", j);
  if (all_passed != nullptr) *all_passed = ok;
  return j;
}

}  // namespace agepop::cli
