#include "epislfv/experiments.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include "epislfv/ensemble.hpp"

#ifndef EPISLFV_VERSION
#define EPISLFV_VERSION "unknown"
#endif

namespace epislfv {

const char* version() { return EPISLFV_VERSION; }

void write_manifest(const std::filesystem::path& dir, const std::string& command, const Json& config,
                    std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  out << Json{{"command", command}, {"config", config}, {"seed", seed}, {"version", version()}}.dump(2) << '\n';
}

void write_trajectory_header(std::ostream& os) { os << "replicate,t,probe_id,infected_mass\n"; }

void write_trajectory_rows(std::ostream& os, std::size_t replicate, const ForwardTrajectory& traj,
                           const std::vector<Probe>& probes) {
  const auto old = os.precision(17);
  for (const auto& s : traj.samples)
    os << replicate << ',' << s.t << ',' << probes[s.probe].id << ',' << s.infected_mass << '\n';
  os.precision(old);
}

void write_dual_header(std::ostream& os, int dim) {
  static constexpr const char* kAxes[] = {"x", "y", "z"};
  os << "replicate,t,event_kind";
  for (int i = 0; i < dim; ++i) os << ',' << kAxes[i];
  os << ",N_after\n";
}

void write_dual_row(std::ostream& os, std::size_t replicate, const DualEvent& ev, int dim) {
  const auto old = os.precision(17);
  os << replicate << ',' << ev.t << ',' << (ev.kind == DualEvent::Kind::kBirth ? "birth" : "death");
  for (int i = 0; i < dim; ++i) os << ',' << ev.atom.x[i];
  os << ',' << ev.n_after << '\n';
  os.precision(old);
}

void write_snapshot_matrix(std::ostream& os, const Grid& grid, const std::vector<double>& infected) {
  const auto old = os.precision(17);
  const auto row = static_cast<std::size_t>(grid.cells_along(0));
  for (std::size_t c = 0; c < infected.size(); ++c) {
    os << infected[c];
    os << ((c + 1) % row == 0 ? '\n' : ' ');
  }
  os.precision(old);
}

ForwardConfig SnapshotRecipe::config() const {
  double margin = 0.0;
  for (const auto& atom : law.atoms) margin = std::max(margin, atom.radius);
  if (side < 2.0 * (init_radius + margin))
    throw std::invalid_argument("snapshot: region too small for the initial ball plus margin");
  ForwardConfig f;
  f.law = law;
  f.gamma = gamma;
  f.region = Region({side, side}, boundary);
  f.cell_edge = cell_edge;
  f.init = InitialCondition::epidemic(BallShape{f.region.center(), init_radius}, 1.0);
  f.horizon = t > 0.0 ? t : 1.0;
  f.snapshot_times = {t};
  return f;
}

Snapshot run_snapshot(const SnapshotRecipe& recipe, SeedSpec seed) {
  const auto traj = run_forward(recipe.config(), seed);
  return traj.snapshots.front();
}

SweepRecipe SweepRecipe::literal() {
  SweepRecipe r;
  for (int x = 0; x <= 8; ++x) {
    r.labels.push_back(x);
    r.impacts.push_back(0.03 + 0.0003 * x);
  }
  return r;
}

SweepRecipe SweepRecipe::extended() {
  SweepRecipe r;
  const auto count = static_cast<double>(grid_ball_count(r.radius, r.cell_edge, 2));
  for (double target : {0.5, 0.8, 1.0, 1.2, 1.5, 2.0}) {
    r.labels.push_back(target);
    r.impacts.push_back(target * r.gamma / (r.rate * count));
  }
  return r;
}

ForwardConfig SweepRecipe::config_for(double impact) const {
  ForwardConfig f;
  f.law = EventLaw(2, {{rate, radius, impact}});
  f.gamma = gamma;
  f.region = Region({side, side}, boundary);
  f.cell_edge = cell_edge;
  f.init = InitialCondition::epidemic(BallShape{f.region.center(), init_radius}, init_level);
  f.horizon = horizon;
  return f;
}

std::vector<SweepRow> run_threshold_sweep(const SweepRecipe& recipe, unsigned threads) {
  if (recipe.labels.size() != recipe.impacts.size())
    throw std::invalid_argument("sweep: labels and impacts differ in length");
  if (recipe.replicates == 0) throw std::invalid_argument("sweep: replicates must be positive");
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < recipe.impacts.size(); ++k) {
    const ForwardConfig config = recipe.config_for(recipe.impacts[k]);
    const double volume = config.region.volume();
    SweepRow row;
    row.x = recipe.labels[k];
    row.u = recipe.impacts[k];
    row.r0_grid = r0_grid(recipe.gamma, config.law, recipe.cell_edge);
    row.proportions = map_replicates(recipe.replicates, threads, [&](std::size_t i) {
      ForwardSimulator sim(config, {recipe.master_seed, i});
      sim.advance_to(recipe.horizon);
      return sim.field().infected_mass() / volume;
    });
    row.median = quantile(row.proportions, 0.5);
    row.p05 = quantile(row.proportions, 0.05);
    row.p95 = quantile(row.proportions, 0.95);
    row.mean = summarize(row.proportions).mean;
    rows.push_back(std::move(row));
  }
  return rows;
}

double sweep_baseline(const SweepRecipe& recipe) {
  ForwardConfig config = recipe.config_for(0.03);
  config.law.atoms.clear();
  ForwardSimulator sim(config, {recipe.master_seed, 0});
  sim.advance_to(recipe.horizon);
  return sim.field().infected_mass() / config.region.volume();
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  const auto old = os.precision(17);
  os << "x,u,r0_grid,median_prop,p05,p95,mean_prop\n";
  for (const auto& r : rows)
    os << r.x << ',' << r.u << ',' << r.r0_grid << ',' << r.median << ',' << r.p05 << ',' << r.p95 << ',' << r.mean
       << '\n';
  os.precision(old);
}

void write_sweep_replicates_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  const auto old = os.precision(17);
  os << "x,u,replicate,proportion\n";
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.proportions.size(); ++i)
      os << r.x << ',' << r.u << ',' << i << ',' << r.proportions[i] << '\n';
  os.precision(old);
}

Json to_json(const SweepRecipe& recipe) {
  return Json{{"side", recipe.side},          {"h", recipe.cell_edge},
              {"gamma", recipe.gamma},        {"radius", recipe.radius},
              {"rate", recipe.rate},          {"init_radius", recipe.init_radius},
              {"init_level", recipe.init_level}, {"horizon", recipe.horizon},
              {"replicates", recipe.replicates}, {"master_seed", recipe.master_seed},
              {"boundary", to_string(recipe.boundary)}, {"x", recipe.labels},
              {"u", recipe.impacts}};
}

}  // namespace epislfv
