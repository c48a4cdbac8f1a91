#include "epislfv/ancestral_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epislfv/ensemble.hpp"

namespace epislfv {

double branching_probability(double u, std::size_t k) {
  if (k == 0) return 0.0;
  if (u >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(k) * std::log1p(-u));
}

double thinning_acceptance(double u, std::size_t k) {
  if (k == 0) throw std::invalid_argument("thinning_acceptance: k must be positive");
  return branching_probability(u, k) / static_cast<double>(k);
}

AtomSet::AtomSet(int dim, double bucket_edge, std::size_t cell_count)
    : dim_(dim), bucket_edge_(bucket_edge), occupancy_(cell_count, 0) {
  require_sim_dimension(dim);
  if (!(bucket_edge > 0.0)) throw std::invalid_argument("AtomSet: bucket edge must be positive");
}

AtomSet::Key AtomSet::key_of(const Point& x) const noexcept {
  Key k{0, 0, 0};
  for (int i = 0; i < dim_; ++i) k[i] = static_cast<long long>(std::floor(x[i] / bucket_edge_));
  return k;
}

void AtomSet::add(const DualAtom& atom) {
  if (position_.count(atom.uid)) throw std::logic_error("AtomSet: duplicate uid");
  position_[atom.uid] = atoms_.size();
  atoms_.push_back(atom);
  buckets_[key_of(atom.x)].push_back({atom.uid, atom.x});
  if (!occupancy_.empty()) ++occupancy_[atom.cell];
  deaths_.emplace(atom.death_time, atom.uid);
}

void AtomSet::remove(std::uint64_t uid) {
  const auto it = position_.find(uid);
  if (it == position_.end()) throw std::logic_error("AtomSet: unknown uid");
  const std::size_t idx = it->second;
  const DualAtom atom = atoms_[idx];
  position_.erase(it);
  if (idx + 1 != atoms_.size()) {
    atoms_[idx] = atoms_.back();
    position_[atoms_[idx].uid] = idx;
  }
  atoms_.pop_back();
  auto bucket = buckets_.find(key_of(atom.x));
  auto& entries = bucket->second;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].uid == uid) {
      entries[i] = entries.back();
      entries.pop_back();
      break;
    }
  }
  if (entries.empty()) buckets_.erase(bucket);
  if (!occupancy_.empty()) --occupancy_[atom.cell];
}

const DualAtom* AtomSet::find(std::uint64_t uid) const {
  const auto it = position_.find(uid);
  return it == position_.end() ? nullptr : &atoms_[it->second];
}

std::pair<double, std::uint64_t> AtomSet::next_death() {
  // Lazy deletion: entries of atoms removed by other means are skipped.
  while (!deaths_.empty()) {
    const auto top = deaths_.top();
    const DualAtom* atom = find(top.second);
    if (atom && atom->death_time == top.first) return top;
    deaths_.pop();
  }
  return {std::numeric_limits<double>::infinity(), 0};
}

std::size_t AtomSet::count_within(const Point& z, double r) const {
  const double r2 = r * r;
  std::size_t k = 0;
  if (atoms_.size() < kLinearScanBelow) {
    for (const auto& atom : atoms_)
      if (euclidean_distance_sq(atom.x, z, dim_) <= r2) ++k;
    return k;
  }
  const Key centre = key_of(z);
  const int l1 = dim_ >= 2 ? 1 : 0;
  const int l2 = dim_ >= 3 ? 1 : 0;
  for (int d2 = -l2; d2 <= l2; ++d2)
    for (int d1 = -l1; d1 <= l1; ++d1)
      for (int d0 = -1; d0 <= 1; ++d0) {
        const Key key{centre[0] + d0, centre[1] + d1, centre[2] + d2};
        const auto it = buckets_.find(key);
        if (it == buckets_.end()) continue;
        for (const auto& e : it->second)
          if (euclidean_distance_sq(e.x, z, dim_) <= r2) ++k;
      }
  return k;
}

DualConfig DualConfig::continuous(const EventLaw& law, double gamma) {
  DualConfig c;
  c.law = law;
  c.gamma = gamma;
  c.mode = DualMode::kContinuous;
  c.validate();
  return c;
}

DualConfig DualConfig::grid_matched(const EventLaw& law, double gamma, const Grid& grid) {
  DualConfig c;
  c.law = law;
  c.gamma = gamma;
  c.mode = DualMode::kGridMatched;
  c.grid = grid;
  c.validate();
  return c;
}

void DualConfig::validate() const {
  law.validate();
  require_sim_dimension(law.dimension);
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("DualConfig: gamma must be nonnegative");
  if (mode == DualMode::kGridMatched) {
    if (!grid) throw std::invalid_argument("DualConfig: grid-matched mode needs a grid");
    if (!grid->region().is_torus()) throw std::invalid_argument("DualConfig: grid-matched mode needs a torus");
    if (grid->dimension() != law.dimension) throw std::invalid_argument("DualConfig: grid and law dimensions differ");
  }
}

namespace {

double max_radius(const EventLaw& law) {
  double r = 0.0;
  for (const auto& atom : law.atoms) r = std::max(r, atom.radius);
  return r > 0.0 ? r : 1.0;
}

double death_time(Rng& rng, double now, double gamma) {
  return gamma > 0.0 ? now + rng.exponential(gamma) : std::numeric_limits<double>::infinity();
}

}  // namespace

AncestralSimulator::AncestralSimulator(const DualConfig& config, const std::vector<Point>& start, Rng rng,
                                       double start_time)
    : config_(config),
      rng_(rng),
      time_(start_time),
      atoms_(config.law.dimension, max_radius(config.law), config.grid ? config.grid->cell_count() : 0) {
  config_.validate();
  const bool grid_mode = config_.mode == DualMode::kGridMatched;
  for (const auto& atom : config_.law.atoms) {
    double volume = 0.0;
    if (grid_mode) {
      stencils_.emplace_back(atom.radius, config_.grid->cell_edge(), config_.law.dimension);
      volume = static_cast<double>(stencils_.back().size()) * config_.grid->cell_volume();
    } else {
      volume = ball_volume(atom.radius, config_.law.dimension);
    }
    class_total_ += atom.rate * volume;
    class_weight_.push_back(class_total_);
  }
  for (auto& w : class_weight_) w /= class_total_;
  if (!class_weight_.empty()) class_weight_.back() = 1.0;

  for (const auto& x : start) {
    if (grid_mode) {
      const std::size_t cell = config_.grid->index_of(x);
      add_atom(config_.grid->cell_center(cell), cell);
    } else {
      add_atom(x, 0);
    }
  }
}

void AncestralSimulator::add_atom(const Point& x, std::size_t cell) {
  DualAtom atom;
  atom.uid = next_uid_++;
  atom.x = x;
  atom.cell = cell;
  atom.death_time = death_time(rng_, time_, config_.gamma);
  atoms_.add(atom);
}

std::size_t AncestralSimulator::pick_class() {
  if (class_weight_.size() == 1) return 0;
  const double pick = rng_.uniform();
  const auto it = std::upper_bound(class_weight_.begin(), class_weight_.end(), pick);
  return std::min<std::size_t>(static_cast<std::size_t>(it - class_weight_.begin()), class_weight_.size() - 1);
}

void AncestralSimulator::count_event() {
  if (births_ + deaths_ > config_.event_cap)
    throw std::overflow_error("ancestral process exceeded its event cap");
}

bool AncestralSimulator::propose_continuous(std::size_t cls, DualAtom& born) {
  const auto& ev = config_.law.atoms[cls];
  const int d = config_.law.dimension;
  const auto& from = atoms_.atoms()[rng_.below(atoms_.size())];
  const Point off = sample_ball_offset(rng_, d, ev.radius);
  Point z;
  for (int i = 0; i < d; ++i) z[i] = from.x[i] + off[i];
  const std::size_t k = atoms_.count_within(z, ev.radius);
  if (!rng_.bernoulli(thinning_acceptance(ev.impact, k))) return false;
  const Point off2 = sample_ball_offset(rng_, d, ev.radius);
  for (int i = 0; i < d; ++i) born.x[i] = z[i] + off2[i];
  return true;
}

bool AncestralSimulator::propose_grid(std::size_t cls, DualAtom& born) {
  const auto& ev = config_.law.atoms[cls];
  const Grid& grid = *config_.grid;
  const int d = grid.dimension();
  const double h = grid.cell_edge();
  const auto& stencil = stencils_[cls].offsets();
  const auto& from = atoms_.atoms()[rng_.below(atoms_.size())];
  const auto& pick = stencil[rng_.below(stencil.size())];
  // Centre cell: any cell whose stencil covers the chosen atom.
  CellCoords centre = grid.coords_of_index(from.cell);
  for (int i = 0; i < d; ++i) centre[i] -= pick[i];
  std::size_t k = 0;
  for (const auto& o : stencil) {
    CellCoords c = centre;
    for (int i = 0; i < d; ++i) c[i] += o[i];
    k += atoms_.occupancy(static_cast<std::size_t>(grid.index_of_coords(c)));
  }
  if (!rng_.bernoulli(thinning_acceptance(ev.impact, k))) return false;
  // z uniform in the centre cell, parent uniform in B(z, r); only the cell
  // displacement matters, so work relative to the centre cell's corner.
  Point local;
  for (int i = 0; i < d; ++i) local[i] = rng_.uniform() * h;
  const Point off = sample_ball_offset(rng_, d, ev.radius);
  CellCoords target = centre;
  for (int i = 0; i < d; ++i) target[i] += static_cast<long long>(std::floor((local[i] + off[i]) / h));
  born.cell = static_cast<std::size_t>(grid.index_of_coords(target));
  born.x = grid.cell_center(born.cell);
  return true;
}

DualEvent AncestralSimulator::step(double horizon) {
  const double inf = std::numeric_limits<double>::infinity();
  for (;;) {
    DualEvent out;
    if (atoms_.empty()) {
      time_ = std::max(time_, horizon);
      return out;
    }
    const auto [td, uid] = atoms_.next_death();
    const double tp = class_total_ > 0.0 ? time_ + rng_.exponential(proposal_rate()) : inf;
    if (std::min(td, tp) > horizon || (td == inf && tp == inf)) {
      time_ = horizon;
      out.t = horizon;
      out.n_after = atoms_.size();
      return out;
    }
    if (td <= tp) {
      time_ = td;
      out.kind = DualEvent::Kind::kDeath;
      out.atom = *atoms_.find(uid);
      atoms_.remove(uid);
      ++deaths_;
      count_event();
      out.t = time_;
      out.n_after = atoms_.size();
      return out;
    }
    time_ = tp;
    ++proposals_;
    const std::size_t cls = pick_class();
    DualAtom born;
    const bool accepted = config_.mode == DualMode::kGridMatched ? propose_grid(cls, born) : propose_continuous(cls, born);
    if (!accepted) continue;
    add_atom(born.x, born.cell);
    ++births_;
    count_event();
    out.kind = DualEvent::Kind::kBirth;
    out.atom = atoms_.atoms().back();
    out.t = time_;
    out.n_after = atoms_.size();
    return out;
  }
}

void AncestralSimulator::run_until(double t) {
  while (time_ < t) {
    const auto ev = step(t);
    if (ev.kind == DualEvent::Kind::kNone) break;
  }
}

namespace {

ProbabilityEstimate estimate(const std::vector<double>& hits) {
  const auto s = summarize(hits);
  return {s.mean, s.standard_error(), s.count};
}

}  // namespace

ProbabilityEstimate survival_prob(const DualConfig& config, double t, std::size_t replicates,
                                  std::uint64_t master_seed, unsigned threads, const Point& origin) {
  if (replicates == 0) throw std::invalid_argument("survival_prob: replicates must be positive");
  const auto hits = map_replicates(replicates, threads, [&](std::size_t i) {
    AncestralSimulator sim(config, {origin}, Rng::for_stream({master_seed, i}, StreamTag::kDual));
    sim.run_until(t);
    return sim.extinct() ? 0.0 : 1.0;
  });
  return estimate(hits);
}

ProbabilityEstimate occupancy_prob(const DualConfig& config, double t, const Shape& window, std::size_t replicates,
                                   std::uint64_t master_seed, unsigned threads, const Point& origin) {
  if (replicates == 0) throw std::invalid_argument("occupancy_prob: replicates must be positive");
  const int d = config.law.dimension;
  const auto* torus = config.grid ? config.grid->region().torus_sides() : nullptr;
  const auto hits = map_replicates(replicates, threads, [&](std::size_t i) {
    AncestralSimulator sim(config, {origin}, Rng::for_stream({master_seed, i}, StreamTag::kDual));
    sim.run_until(t);
    for (const auto& atom : sim.atoms())
      if (shape_contains(window, atom.x, d, torus)) return 1.0;
    return 0.0;
  });
  return estimate(hits);
}

double first_birth_time(const DualConfig& config, const std::vector<Point>& atoms, SeedSpec seed) {
  DualConfig frozen = config;
  frozen.gamma = 0.0;
  AncestralSimulator sim(frozen, atoms, Rng::for_stream(seed, StreamTag::kDual));
  const auto ev = sim.step(std::numeric_limits<double>::infinity());
  return ev.kind == DualEvent::Kind::kBirth ? ev.t : std::numeric_limits<double>::infinity();
}

BetaCouplingResult run_coupled_beta(const EventLaw& law, double gamma, double beta, double horizon, SeedSpec seed,
                                    std::size_t event_cap) {
  law.validate();
  if (!(beta >= 1.0)) throw std::invalid_argument("run_coupled_beta: beta must be >= 1");
  if (!(gamma >= 0.0)) throw std::invalid_argument("run_coupled_beta: gamma must be nonnegative");
  const int d = law.dimension;
  require_sim_dimension(d);
  Rng rng = Rng::for_stream(seed, StreamTag::kCoupling);
  const double edge = max_radius(law);
  AtomSet full(d, edge);
  AtomSet sub(d, edge);

  std::vector<double> weight;
  double total = 0.0;
  for (const auto& atom : law.atoms) {
    total += atom.rate * ball_volume(atom.radius, d);
    weight.push_back(total);
  }

  BetaCouplingResult result;
  std::uint64_t next_uid = 0;
  double t = 0.0;
  {
    DualAtom root;
    root.uid = next_uid++;
    root.death_time = death_time(rng, t, gamma);
    full.add(root);
    sub.add(root);
  }
  result.full_sizes.emplace_back(0.0, 1);
  result.beta_sizes.emplace_back(0.0, 1);

  auto check_nesting = [&] {
    ++result.checks;
    for (const auto& atom : sub.atoms()) {
      const DualAtom* twin = full.find(atom.uid);
      if (!twin || !(twin->x == atom.x) || twin->death_time != atom.death_time) {
        ++result.violations;
        if (!result.first_violation_time) result.first_violation_time = t;
        return;
      }
    }
  };

  while (!full.empty()) {
    const auto [td, uid] = full.next_death();
    const double tp = total > 0.0 ? t + rng.exponential(static_cast<double>(full.size()) * total)
                                  : std::numeric_limits<double>::infinity();
    if (std::min(td, tp) > horizon) break;
    if (td <= tp) {
      t = td;
      if (sub.find(uid)) sub.remove(uid);
      full.remove(uid);
    } else {
      t = tp;
      std::size_t cls = 0;
      if (weight.size() > 1) {
        const double pick = rng.uniform() * total;
        cls = std::min<std::size_t>(
            static_cast<std::size_t>(std::upper_bound(weight.begin(), weight.end(), pick) - weight.begin()),
            weight.size() - 1);
      }
      const auto& ev = law.atoms[cls];
      const auto& from = full.atoms()[rng.below(full.size())];
      const Point off = sample_ball_offset(rng, d, ev.radius);
      Point z;
      for (int i = 0; i < d; ++i) z[i] = from.x[i] + off[i];
      const std::size_t k_full = full.count_within(z, ev.radius);
      // Proposal intensity is k_full times the true centre intensity.
      if (!rng.bernoulli(1.0 / static_cast<double>(k_full))) continue;
      const double beta_impact = beta * ev.impact;
      const bool markable = beta_impact <= 1.0;
      const bool marked = markable && (beta == 1.0 || rng.bernoulli(1.0 / beta));
      const std::size_t k_sub = sub.count_within(z, ev.radius);
      const double p_full = branching_probability(ev.impact, k_full);
      const double p_beta = markable ? branching_probability(beta_impact, k_sub) : 0.0;
      double q_marked = p_full;
      double q_unmarked = p_full;
      if (markable && p_beta > p_full) {
        q_marked = p_beta;
        q_unmarked = beta == 1.0 ? p_full : std::clamp((p_full - p_beta / beta) / (1.0 - 1.0 / beta), 0.0, 1.0);
      }
      const double shared = rng.uniform();
      const bool full_birth = shared < (marked ? q_marked : q_unmarked);
      const bool beta_birth = marked && shared < p_beta;
      if (!full_birth && !beta_birth) continue;
      DualAtom born;
      born.uid = next_uid++;
      const Point off2 = sample_ball_offset(rng, d, ev.radius);
      for (int i = 0; i < d; ++i) born.x[i] = z[i] + off2[i];
      born.death_time = death_time(rng, t, gamma);
      if (full_birth) full.add(born);
      if (beta_birth) {
        sub.add(born);
        if (t < result.first_beta_birth) result.first_beta_birth = t;
      }
    }
    ++result.events;
    if (result.events > event_cap) throw std::overflow_error("coupled ancestral run exceeded its event cap");
    result.full_sizes.emplace_back(t, full.size());
    result.beta_sizes.emplace_back(t, sub.size());
    check_nesting();
  }
  return result;
}

}  // namespace epislfv
