#include "epislfv/forward_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epislfv {

double relax_value(double omega, double gamma, double dt) {
  if (dt < 0.0) throw std::invalid_argument("relax_value: negative time step");
  return omega + (1.0 - omega) * (1.0 - std::exp(-gamma * dt));
}

// Above this many e-foldings the shared factor is folded into the cells.
constexpr double kRebaseExponent = 50.0;

DensityField::DensityField(const Grid& grid, double gamma, std::vector<double> infected, double start_time)
    : grid_(grid), gamma_(gamma), clock_(start_time), ref_time_(start_time), scaled_(std::move(infected)) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("DensityField: gamma must be nonnegative");
  if (scaled_.size() != grid_.cell_count())
    throw std::invalid_argument("DensityField: value count does not match the grid");
  for (double v : scaled_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("DensityField: densities must lie in [0, 1]");
    mass_scaled_ += v;
  }
  last_update_.assign(scaled_.size(), start_time);
}

void DensityField::relax(double target_time) {
  if (target_time < clock_) throw std::invalid_argument("relax: target time is in the past");
  clock_ = target_time;
  const double exponent = gamma_ * (clock_ - ref_time_);
  if (eager_ || exponent > kRebaseExponent) {
    rebase();
  } else {
    decay_ = std::exp(-exponent);
  }
}

void DensityField::rebase() {
  const double factor = std::exp(-gamma_ * (clock_ - ref_time_));
  double total = 0.0;
  for (double& s : scaled_) {
    s *= factor;
    total += s;
  }
  mass_scaled_ = total;
  ref_time_ = clock_;
  decay_ = 1.0;
}

double DensityField::infect(std::size_t cell, double u) {
  const double before = infected(cell);
  // In scaled units the update u + (1 - u) * before is affine with positive
  // coefficients, so it stays monotone under rounding and coupled fields
  // keep their order.
  const double s_old = scaled_[cell];
  const double s_new = (1.0 - u) * s_old + u / decay_;
  scaled_[cell] = s_new;
  mass_scaled_ += s_new - s_old;
  last_update_[cell] = clock_;
  return infected(cell) - before;
}

double DensityField::infect_all(const std::vector<std::size_t>& cells, double u) {
  const double lift = u / decay_;
  const double keep = 1.0 - u;
  double before = 0.0;
  double after = 0.0;
  for (std::size_t c : cells) {
    const double s_old = scaled_[c];
    const double s_new = keep * s_old + lift;
    scaled_[c] = s_new;
    last_update_[c] = clock_;
    before += s_old;
    after += s_new;
  }
  mass_scaled_ += after - before;
  return (after - before) * decay_;
}

double DensityField::infected_mass() const {
  double total = 0.0;
  for (std::size_t c = 0; c < scaled_.size(); ++c) total += infected(c);
  return total * grid_.cell_volume();
}

double DensityField::infected_mass(const std::vector<std::size_t>& cells) const {
  double total = 0.0;
  for (std::size_t c : cells) total += infected(c);
  return total * grid_.cell_volume();
}

std::vector<double> DensityField::infected_values() const {
  std::vector<double> out(scaled_.size());
  for (std::size_t c = 0; c < scaled_.size(); ++c) out[c] = infected(c);
  return out;
}

bool DensityField::within_bounds() const {
  for (std::size_t c = 0; c < scaled_.size(); ++c) {
    const double v = infected(c);
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return true;
}

InitialCondition InitialCondition::endemic(double epsilon) {
  InitialCondition ic;
  ic.kind = Kind::kEndemic;
  ic.level = epsilon;
  ic.mask = WholeSpace{};
  ic.validate();
  return ic;
}

InitialCondition InitialCondition::pandemic(const Point& normal, double offset, double epsilon) {
  InitialCondition ic;
  ic.kind = Kind::kPandemic;
  ic.level = epsilon;
  ic.mask = HalfSpaceShape{normal, offset};
  ic.validate();
  return ic;
}

InitialCondition InitialCondition::epidemic(const Shape& mask, double level) {
  InitialCondition ic;
  ic.kind = Kind::kEpidemic;
  ic.level = level;
  ic.mask = mask;
  ic.validate();
  return ic;
}

InitialCondition InitialCondition::from_cells(std::vector<double> infected) {
  InitialCondition ic;
  ic.kind = Kind::kCustom;
  ic.custom = std::move(infected);
  ic.validate();
  return ic;
}

void InitialCondition::validate() const {
  if (kind == Kind::kCustom) {
    for (double v : custom)
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("InitialCondition: densities must lie in [0, 1]");
    return;
  }
  if (!(level > 0.0) || level > 1.0) throw std::invalid_argument("InitialCondition: level must lie in (0, 1]");
  if (kind == Kind::kPandemic && !std::holds_alternative<HalfSpaceShape>(mask))
    throw std::invalid_argument("InitialCondition: pandemic mask must be a half-space");
  if (kind == Kind::kEpidemic && !shape_is_bounded(mask))
    throw std::invalid_argument("InitialCondition: epidemic mask must be bounded");
}

std::vector<double> InitialCondition::rasterize(const Grid& grid) const {
  validate();
  if (kind == Kind::kCustom) {
    if (custom.size() != grid.cell_count())
      throw std::invalid_argument("InitialCondition: custom field does not match the grid");
    return custom;
  }
  std::vector<double> out(grid.cell_count(), 0.0);
  if (kind == Kind::kEndemic) {
    std::fill(out.begin(), out.end(), level);
    return out;
  }
  const auto cells = grid.rasterize(mask);
  if (kind == Kind::kEpidemic && cells.empty())
    throw std::invalid_argument("InitialCondition: epidemic mask covers no cell");
  for (std::size_t c : cells) out[c] = level;
  return out;
}

double InitialCondition::infected_at(const Point& x, const Region& region) const {
  switch (kind) {
    case Kind::kEndemic:
      return level;
    case Kind::kPandemic:
    case Kind::kEpidemic:
      return shape_contains(mask, x, region.dimension, region.torus_sides()) ? level : 0.0;
    case Kind::kCustom:
      break;
  }
  throw std::invalid_argument("InitialCondition: custom fields have no pointwise value");
}

void ForwardConfig::validate() const {
  law.validate();
  region.validate();
  if (law.dimension != region.dimension)
    throw std::invalid_argument("ForwardConfig: law and region dimensions differ");
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("ForwardConfig: gamma must be nonnegative");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("ForwardConfig: horizon must be positive");
  for (const auto& probe : probes)
    for (double t : probe.times)
      if (!(t >= 0.0 && t <= horizon))
        throw std::invalid_argument("ForwardConfig: probe time outside [0, horizon]");
  for (double t : snapshot_times)
    if (!(t >= 0.0 && t <= horizon))
      throw std::invalid_argument("ForwardConfig: snapshot time outside [0, horizon]");
  init.validate();
}

namespace {

std::vector<std::vector<long long>> linear_offsets(const std::vector<Stencil>& stencils, const Grid& grid) {
  std::vector<std::vector<long long>> out;
  for (const auto& st : stencils) {
    std::vector<long long> lin;
    for (const auto& o : st.offsets()) {
      long long v = 0;
      for (int i = 0; i < grid.dimension(); ++i) v += o[i] * grid.stride(i);
      lin.push_back(v);
    }
    out.push_back(std::move(lin));
  }
  return out;
}

std::vector<Stencil> build_stencils(const ForwardConfig& config, const Grid& grid) {
  std::vector<Stencil> out;
  for (const auto& atom : config.law.atoms) {
    out.emplace_back(atom.radius, config.cell_edge, grid.dimension());
    if (grid.region().is_torus()) {
      for (int i = 0; i < grid.dimension(); ++i)
        if (2 * out.back().reach() + 1 > grid.cells_along(i))
          throw std::invalid_argument("ForwardSimulator: event radius wraps around the torus");
    }
  }
  return out;
}

const ForwardConfig& checked(const ForwardConfig& config) {
  config.validate();
  return config;
}

}  // namespace

ForwardSimulator::ForwardSimulator(const ForwardConfig& config, SeedSpec seed)
    : ForwardSimulator(config, config.init.rasterize(Grid(config.region, config.cell_edge)), seed) {}

ForwardSimulator::ForwardSimulator(const ForwardConfig& config, std::vector<double> infected, SeedSpec seed)
    : config_(checked(config)),
      grid_(config.region, config.cell_edge),
      field_(grid_, config.gamma, std::move(infected)),
      stencils_(build_stencils(config_, grid_)),
      linear_offsets_(linear_offsets(stencils_, grid_)),
      stream_(config.law, config.region, Rng::for_stream(seed, StreamTag::kEvents), 0.0) {
  field_.set_eager(config.eager);
  pending_ = stream_.next();
}

void ForwardSimulator::covered_cells(const AugmentedEvent& ev, std::vector<std::size_t>& out) const {
  out.clear();
  const CellCoords centre = grid_.coords_of(ev.z);
  const int d = grid_.dimension();
  const auto atom = static_cast<std::size_t>(ev.atom_index);
  const long long reach = stencils_[atom].reach();
  bool interior = true;
  long long base = 0;
  for (int i = 0; i < d; ++i) {
    interior = interior && centre[i] - reach >= 0 && centre[i] + reach < grid_.cells_along(i);
    base += centre[i] * grid_.stride(i);
  }
  if (interior) {
    for (long long off : linear_offsets_[atom]) out.push_back(static_cast<std::size_t>(base + off));
    return;
  }
  for (const auto& off : stencils_[static_cast<std::size_t>(ev.atom_index)].offsets()) {
    CellCoords c = centre;
    for (int i = 0; i < d; ++i) c[i] += off[i];
    const long long idx = grid_.index_of_coords(c);
    if (idx >= 0) out.push_back(static_cast<std::size_t>(idx));
  }
}

EventOutcome ForwardSimulator::step() {
  EventOutcome out;
  out.event = pending_;
  const AugmentedEvent& ev = out.event;
  field_.relax(ev.t);
  out.parent_cell = grid_.index_of(ev.p);
  // a <= omega(parent): healthy parent, nothing happens.
  out.parent_infected = ev.a > field_.healthy(out.parent_cell);
  if (out.parent_infected) {
    covered_cells(ev, scratch_);
    out.mass_added = field_.infect_all(scratch_, ev.u) * grid_.cell_volume();
    ++infections_;
    if (config_.debug_checks) {
      for (std::size_t c : scratch_) {
        const double v = field_.infected(c);
        if (!(v >= 0.0 && v <= 1.0)) throw std::logic_error("density left [0, 1]");
      }
    }
  }
  ++events_;
  pending_ = stream_.next();
  return out;
}

void ForwardSimulator::advance_to(double t) {
  while (pending_.t <= t) step();
  if (t > field_.time()) field_.relax(t);
}

std::vector<ProbeCells> rasterize_probes(const Grid& grid, const std::vector<Probe>& probes) {
  std::vector<ProbeCells> out;
  for (const auto& probe : probes) {
    ProbeCells pc;
    pc.whole = std::holds_alternative<WholeSpace>(probe.window);
    if (!pc.whole) pc.cells = grid.rasterize(probe.window);
    out.push_back(std::move(pc));
  }
  return out;
}

namespace {

struct Checkpoint {
  double t;
  bool snapshot;
  std::size_t index;
};

std::vector<Checkpoint> checkpoints(const ForwardConfig& config) {
  std::vector<Checkpoint> out;
  for (std::size_t p = 0; p < config.probes.size(); ++p)
    for (double t : config.probes[p].times) out.push_back({t, false, p});
  for (std::size_t s = 0; s < config.snapshot_times.size(); ++s)
    out.push_back({config.snapshot_times[s], true, s});
  std::stable_sort(out.begin(), out.end(), [](const Checkpoint& a, const Checkpoint& b) { return a.t < b.t; });
  return out;
}

double probe_mass(const DensityField& field, const ProbeCells& pc) {
  return pc.whole ? field.infected_mass() : field.infected_mass(pc.cells);
}

void record(const ForwardSimulator& sim, const std::vector<ProbeCells>& cells, const Checkpoint& cp,
            ForwardTrajectory& traj) {
  if (cp.snapshot) {
    traj.snapshots.push_back({cp.t, sim.field().infected_values()});
  } else {
    traj.samples.push_back({cp.t, cp.index, probe_mass(sim.field(), cells[cp.index])});
  }
}

ForwardTrajectory drive(ForwardSimulator& sim) {
  const auto& config = sim.config();
  const auto cells = rasterize_probes(sim.grid(), config.probes);
  ForwardTrajectory traj;
  for (const auto& cp : checkpoints(config)) {
    sim.advance_to(cp.t);
    record(sim, cells, cp, traj);
  }
  sim.advance_to(config.horizon);
  traj.final_mass = sim.field().infected_mass();
  traj.events = sim.events();
  traj.infections = sim.infections();
  return traj;
}

}  // namespace

ForwardTrajectory run_forward(const ForwardConfig& config, SeedSpec seed) {
  ForwardSimulator sim(config, seed);
  return drive(sim);
}

ForwardTrajectory run_forward(const ForwardConfig& config, std::vector<double> infected, SeedSpec seed) {
  ForwardSimulator sim(config, std::move(infected), seed);
  return drive(sim);
}

PairedRun run_paired_monotone(const ForwardConfig& config, std::vector<double> infected_more,
                              std::vector<double> infected_less, SeedSpec seed) {
  if (infected_more.size() != infected_less.size())
    throw std::invalid_argument("run_paired_monotone: fields differ in size");
  for (std::size_t c = 0; c < infected_more.size(); ++c)
    if (infected_more[c] < infected_less[c])
      throw std::invalid_argument("run_paired_monotone: initial fields are not ordered");

  ForwardSimulator more(config, std::move(infected_more), seed);
  ForwardSimulator less(config, std::move(infected_less), seed);
  PairedRun result;
  auto check = [&](std::size_t c, double t) {
    ++result.checks;
    if (more.field().infected(c) < less.field().infected(c)) {
      ++result.violations;
      if (!result.first_violation) result.first_violation = OrderViolation{t, c};
    }
  };
  auto check_all = [&](double t) {
    for (std::size_t c = 0; c < more.field().size(); ++c) check(c, t);
  };
  std::vector<std::size_t> touched;
  auto run_until = [&](double t) {
    while (more.peek().t <= t) {
      const auto a = more.step();
      const auto b = less.step();
      if (a.event.t != b.event.t) throw std::logic_error("paired streams diverged");
      more.covered_cells(a.event, touched);
      for (std::size_t c : touched) check(c, a.event.t);
      check(a.parent_cell, a.event.t);
    }
    more.advance_to(t);
    less.advance_to(t);
  };

  check_all(0.0);
  const auto cells = rasterize_probes(more.grid(), config.probes);
  for (const auto& cp : checkpoints(config)) {
    run_until(cp.t);
    check_all(cp.t);
    record(more, cells, cp, result.low);
    record(less, cells, cp, result.high);
  }
  run_until(config.horizon);
  check_all(config.horizon);
  result.low.final_mass = more.field().infected_mass();
  result.high.final_mass = less.field().infected_mass();
  result.low.events = result.high.events = more.events();
  result.low.infections = more.infections();
  result.high.infections = less.infections();
  return result;
}

}  // namespace epislfv
