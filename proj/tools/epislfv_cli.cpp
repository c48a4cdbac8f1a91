// Command-line front end: forward and dual runs, duality and coupling
// checks, R0 calculus, the snapshot recipe and the threshold sweep.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epislfv/ancestral_sim.hpp"
#include "epislfv/couplings.hpp"
#include "epislfv/duality.hpp"
#include "epislfv/ensemble.hpp"
#include "epislfv/event_law.hpp"
#include "epislfv/experiments.hpp"
#include "epislfv/forward_sim.hpp"
#include "epislfv/json_io.hpp"

namespace fs = std::filesystem;
using namespace epislfv;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<std::string> boundary;
  unsigned threads = 0;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json load_config(const Options& o, bool required) {
  if (o.config.empty()) {
    if (required) throw ConfigError("--config is required for this command");
    return Json::object();
  }
  std::ifstream in(o.config);
  if (!in) throw ConfigError("cannot open config file '" + o.config + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void apply_overrides(const Options& o, RunConfig& rc) {
  if (o.seed) rc.master_seed = *o.seed;
  if (o.replicates) rc.replicates = *o.replicates;
  if (o.boundary) rc.forward.region.boundary = boundary_from_string(*o.boundary);
}

void write_snapshot_files(const fs::path& dir, const std::string& stem, const Grid& grid, const Snapshot& snap,
                          std::uint64_t seed) {
  auto matrix = open_out(dir / (stem + ".txt"));
  write_snapshot_matrix(matrix, grid, snap.infected);
  auto sidecar = open_out(dir / (stem + ".json"));
  sidecar << Json{{"t", snap.t}, {"h", grid.cell_edge()}, {"region", to_json(grid.region())}, {"seed", seed}}.dump(2)
          << '\n';
}

int cmd_forward_run(const Options& o) {
  RunConfig rc = run_config_from_json(load_config(o, true));
  apply_overrides(o, rc);
  rc.forward.validate();
  const unsigned threads = resolve_threads(o.threads);
  const auto runs = map_replicates(rc.replicates, threads,
                                   [&](std::size_t i) { return run_forward(rc.forward, {rc.master_seed, i}); });
  const fs::path dir = o.out;
  auto csv = open_out(dir / "trajectory.csv");
  write_trajectory_header(csv);
  for (std::size_t i = 0; i < runs.size(); ++i) write_trajectory_rows(csv, i, runs[i], rc.forward.probes);
  const Grid grid(rc.forward.region, rc.forward.cell_edge);
  if (!runs.empty())
    for (std::size_t k = 0; k < runs.front().snapshots.size(); ++k)
      write_snapshot_files(dir, "snapshot_" + std::to_string(k), grid, runs.front().snapshots[k], rc.master_seed);
  write_manifest(dir, "forward-run", to_json(rc), rc.master_seed);
  std::cout << "forward-run: " << runs.size() << " replicates -> " << (dir / "trajectory.csv").string() << '\n';
  return 0;
}

DualConfig dual_config_from_json(const Json& j) {
  const EventLaw law = event_law_from_json(j.at("law"));
  const double gamma = j.at("gamma").get<double>();
  if (j.value("mode", std::string("continuous")) == "grid") {
    const Region region = region_from_json(j.at("region"));
    return DualConfig::grid_matched(law, gamma, Grid(region, j.value("h", 1.0)));
  }
  return DualConfig::continuous(law, gamma);
}

int cmd_dual_run(const Options& o) {
  const Json j = load_config(o, true);
  DualConfig dual;
  double t = 0.0;
  std::vector<Point> start;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  try {
    dual = dual_config_from_json(j);
    t = j.at("t").get<double>();
    const int d = dual.law.dimension;
    if (j.contains("start")) {
      for (const auto& p : j.at("start")) start.push_back(point_from_json(p, d));
    } else {
      start.push_back(dual.grid ? dual.grid->region().center() : Point{});
    }
    replicates = o.replicates.value_or(j.value("replicates", std::size_t{100}));
    seed = o.seed.value_or(j.value("master_seed", std::uint64_t{0}));
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  }
  const int d = dual.law.dimension;
  struct Run {
    std::string rows;
    double alive = 0.0;
  };
  const auto runs = map_replicates(replicates, resolve_threads(o.threads), [&](std::size_t i) {
    AncestralSimulator sim(dual, start, Rng::for_stream({seed, i}, StreamTag::kDual));
    std::ostringstream rows;
    for (;;) {
      const auto ev = sim.step(t);
      if (ev.kind == DualEvent::Kind::kNone) break;
      write_dual_row(rows, i, ev, d);
    }
    return Run{rows.str(), sim.extinct() ? 0.0 : 1.0};
  });
  const fs::path dir = o.out;
  auto csv = open_out(dir / "dual_trajectory.csv");
  write_dual_header(csv, d);
  std::vector<double> alive;
  for (const auto& r : runs) {
    csv << r.rows;
    alive.push_back(r.alive);
  }
  const auto s = summarize(alive);
  const Json summary{{"law", to_json(dual.law)}, {"gamma", dual.gamma},     {"t", t},
                     {"P_survival", s.mean},     {"SE", s.standard_error()}, {"replicates", replicates},
                     {"seed", seed}};
  auto js = open_out(dir / "dual_summary.json");
  js << summary.dump(2) << '\n';
  write_manifest(dir, "dual-run", j, seed);
  std::cout << summary.dump() << '\n';
  return 0;
}

int cmd_duality_check(const Options& o) {
  const Json j = load_config(o, true);
  const Json& list = j.is_array() ? j : (j.contains("cases") ? j.at("cases") : Json::array({j}));
  std::vector<DualityCase> cases;
  try {
    for (const auto& c : list) {
      auto dc = duality_case_from_json(c);
      if (o.replicates) dc.forward_replicates = dc.dual_replicates = *o.replicates;
      if (o.seed) {
        dc.forward_seed = *o.seed;
        dc.dual_seed = *o.seed + 1;
      }
      if (o.boundary) dc.region.boundary = boundary_from_string(*o.boundary);
      cases.push_back(std::move(dc));
    }
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  }
  const unsigned threads = resolve_threads(o.threads);
  Json reports = Json::array();
  std::printf("%-24s %14s %14s %9s %s\n", "case", "lhs", "rhs", "z", "pass");
  for (const auto& c : cases) {
    const auto r = duality_check(c, threads);
    reports.push_back(to_json(r));
    std::printf("%-24s %14.8f %14.8f %9.3f %s\n", r.name.c_str(), r.lhs, r.rhs, r.z, r.pass ? "yes" : "no");
  }
  const fs::path dir = o.out;
  auto out = open_out(dir / "duality_report.json");
  out << reports.dump(2) << '\n';
  write_manifest(dir, "duality-check", j, o.seed.value_or(0));
  return 0;
}

int cmd_coupling_check(const Options& o) {
  const Json j = load_config(o, true);
  const std::string kind = j.value("kind", std::string());
  const std::size_t runs = o.replicates.value_or(j.value("runs", std::size_t{100}));
  const std::uint64_t seed = o.seed.value_or(j.value("master_seed", std::uint64_t{0}));
  const unsigned threads = resolve_threads(o.threads);
  std::vector<ViolationReport> reports;
  try {
    if (kind == "sjp" || kind == "monotone") {
      RunConfig rc = run_config_from_json(j);
      apply_overrides(o, rc);
      if (kind == "sjp") {
        reports = map_replicates(runs, threads,
                                 [&](std::size_t i) { return run_coupled_sjp_forward(rc.forward, {seed, i}); });
      } else {
        const double scale = j.value("scale", 0.5);
        const auto more = rc.forward.init.rasterize(Grid(rc.forward.region, rc.forward.cell_edge));
        auto less = more;
        for (double& v : less) v *= scale;
        reports = map_replicates(runs, threads, [&](std::size_t i) {
          const auto pair = run_paired_monotone(rc.forward, more, less, {seed, i});
          ViolationReport r;
          r.runs = 1;
          r.violations = pair.violations;
          r.checks = pair.checks;
          if (pair.first_violation) {
            r.first_t = pair.first_violation->t;
            r.first_where = "cell " + std::to_string(pair.first_violation->cell);
          }
          return r;
        });
      }
    } else if (kind == "contact") {
      const EventLaw law = event_law_from_json(j.at("law"));
      const double gamma = j.at("gamma").get<double>();
      const double horizon = j.at("horizon").get<double>();
      const long long window = j.value("window", 50LL);
      reports = map_replicates(runs, threads, [&](std::size_t i) {
        return run_coupled_contact_dual(law, gamma, horizon, {seed, i}, window);
      });
    } else if (kind == "beta") {
      const EventLaw law = event_law_from_json(j.at("law"));
      const double gamma = j.at("gamma").get<double>();
      const double beta = j.at("beta").get<double>();
      const double horizon = j.at("horizon").get<double>();
      reports = map_replicates(runs, threads, [&](std::size_t i) {
        const auto res = run_coupled_beta(law, gamma, beta, horizon, {seed, i});
        ViolationReport r;
        r.runs = 1;
        r.violations = res.violations;
        r.checks = res.checks;
        if (res.first_violation_time) {
          r.first_t = res.first_violation_time;
          r.first_where = "nesting";
        }
        return r;
      });
    } else {
      throw ConfigError("coupling-check: 'kind' must be one of sjp, monotone, contact, beta");
    }
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  }
  ViolationReport total;
  for (const auto& r : reports) total.merge(r);
  const fs::path dir = o.out;
  auto out = open_out(dir / "violation_report.json");
  out << to_json(total).dump(2) << '\n';
  write_manifest(dir, "coupling-check", j, seed);
  std::cout << to_json(total).dump() << '\n';
  return 0;
}

int cmd_r0(const Options& o) {
  const Json j = load_config(o, true);
  EventLaw law;
  double gamma = 0.0;
  try {
    law = event_law_from_json(j.at("law"));
    gamma = j.at("gamma").get<double>();
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  }
  Json result{{"r0", r0(gamma, law)}};
  if (!law.empty()) result["c_epidemic"] = c_epidemic(gamma, law);
  if (j.contains("h")) {
    const double h = j.at("h").get<double>();
    result["h"] = h;
    result["r0_grid"] = r0_grid(gamma, law, h);
    if (!law.empty()) result["c_epidemic_grid"] = c_epidemic_grid(gamma, law, h);
  }
  std::cout << result.dump(2) << '\n';
  return 0;
}

int cmd_snapshot(const Options& o) {
  const Json j = load_config(o, false);
  SnapshotRecipe recipe;
  try {
    recipe.side = j.value("side", recipe.side);
    recipe.cell_edge = j.value("h", recipe.cell_edge);
    recipe.gamma = j.value("gamma", recipe.gamma);
    if (j.contains("law")) recipe.law = event_law_from_json(j.at("law"));
    recipe.init_radius = j.value("init_radius", recipe.init_radius);
    recipe.t = j.value("t", recipe.t);
  } catch (const Json::exception& e) {
    throw ConfigError(e.what());
  }
  if (o.boundary) recipe.boundary = boundary_from_string(*o.boundary);
  const std::uint64_t seed = o.seed.value_or(j.value("master_seed", std::uint64_t{1}));
  const ForwardConfig config = recipe.config();
  const auto snap = run_snapshot(recipe, {seed, 0});
  const fs::path dir = o.out;
  write_snapshot_files(dir, "snapshot", Grid(config.region, config.cell_edge), snap, seed);
  Json cfg{{"side", recipe.side}, {"h", recipe.cell_edge}, {"gamma", recipe.gamma}, {"law", to_json(recipe.law)},
           {"init_radius", recipe.init_radius}, {"t", recipe.t}, {"boundary", to_string(recipe.boundary)}};
  write_manifest(dir, "snapshot", cfg, seed);
  double mass = 0.0;
  for (double v : snap.infected) mass += v;
  std::cout << "snapshot: t=" << snap.t << " infected mass " << mass * config.cell_edge * config.cell_edge << '\n';
  return 0;
}

int cmd_threshold_sweep(const Options& o) {
  const Json j = load_config(o, false);
  const std::string which = j.value("which", std::string("both"));
  auto configure = [&](SweepRecipe r) {
    r.side = j.value("side", r.side);
    r.cell_edge = j.value("h", r.cell_edge);
    r.gamma = j.value("gamma", r.gamma);
    r.horizon = j.value("horizon", r.horizon);
    r.replicates = o.replicates.value_or(j.value("replicates", r.replicates));
    r.master_seed = o.seed.value_or(j.value("master_seed", r.master_seed));
    if (o.boundary) r.boundary = boundary_from_string(*o.boundary);
    return r;
  };
  const unsigned threads = resolve_threads(o.threads);
  const fs::path dir = o.out;
  Json manifest_config = Json::object();
  auto run = [&](const SweepRecipe& recipe, const std::string& stem) {
    const auto rows = run_threshold_sweep(recipe, threads);
    auto csv = open_out(dir / (stem + ".csv"));
    write_sweep_csv(csv, rows);
    auto reps = open_out(dir / (stem + "_replicates.csv"));
    write_sweep_replicates_csv(reps, rows);
    manifest_config[stem] = to_json(recipe);
    std::cout << stem << ": " << rows.size() << " points -> " << (dir / (stem + ".csv")).string() << '\n';
  };
  SweepRecipe literal = configure(SweepRecipe::literal());
  if (which == "literal" || which == "both") run(literal, "sweep");
  if (which == "extended" || which == "both") run(configure(SweepRecipe::extended()), "sweep_extended");
  if (which != "literal" && which != "extended" && which != "both")
    throw ConfigError("threshold-sweep: 'which' must be literal, extended or both");
  auto base = open_out(dir / "baseline.json");
  base << Json{{"event_free_proportion", sweep_baseline(literal)}, {"horizon", literal.horizon}}.dump(2) << '\n';
  write_manifest(dir, "threshold-sweep", manifest_config, literal.master_seed);
  return 0;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON config file");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "master seed (overrides the config)");
  sub->add_option("--replicates", o.replicates, "replicate count (overrides the config)");
  sub->add_option("--boundary", o.boundary, "torus or truncated")->check(CLI::IsMember({"torus", "truncated"}));
  sub->add_option("--threads", o.threads, "worker threads (EPISLFV_THREADS wins)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-driven simulator for the spatial SIS epidemic process and its ancestral dual"};
  app.require_subcommand(1);
  Options o;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Command commands[] = {
      {"forward-run", "run forward replicates and write probe trajectories", cmd_forward_run},
      {"dual-run", "run the ancestral process and estimate survival", cmd_dual_run},
      {"duality-check", "compare forward and dual estimates of a duality case", cmd_duality_check},
      {"coupling-check", "count domination violations in a coupled run", cmd_coupling_check},
      {"r0", "print R0 and the growth constant for a law", cmd_r0},
      {"snapshot", "write the field of the snapshot recipe", cmd_snapshot},
      {"threshold-sweep", "run the survival sweep over the impact parameter", cmd_threshold_sweep},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, o);
    subs.emplace_back(sub, &c);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }
  for (const auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    try {
      return cmd->run(o);
    } catch (const std::exception& e) {
      std::cerr << Json{{"error", e.what()}, {"command", cmd->name}}.dump() << '\n';
      return 1;
    }
  }
  return 2;
}
