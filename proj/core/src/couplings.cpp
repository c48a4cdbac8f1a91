#include "epislfv/couplings.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "epislfv/ancestral_sim.hpp"
#include "epislfv/grid.hpp"

namespace epislfv {

namespace {

struct SiteHash {
  std::size_t operator()(const SiteCoords& k) const noexcept {
    std::uint64_t h = 0x51ed270b27a4b2d1ULL;
    for (long long v : k) h = mix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};

std::uint64_t site_key(const SiteCoords& s) {
  return SiteHash{}(s);
}

bool in_window(const SiteCoords& s, long long window, int dim) {
  for (int i = 0; i < dim; ++i)
    if (std::llabs(s[i]) > window) return false;
  return true;
}

std::string describe(const SiteCoords& s, int dim) {
  std::string out = "site(";
  for (int i = 0; i < dim; ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

}  // namespace

double ContactSetup::cube_edge() const { return radius / std::sqrt(dimension + 3.0); }

void ContactSetup::validate() const {
  require_sim_dimension(dimension);
  if (!(gamma >= 0.0)) throw std::invalid_argument("ContactSetup: gamma must be nonnegative");
  if (!(radius > 0.0)) throw std::invalid_argument("ContactSetup: radius must be positive");
  if (!(infection_rate >= 0.0)) throw std::invalid_argument("ContactSetup: infection rate must be nonnegative");
  if (window < 0) throw std::invalid_argument("ContactSetup: window must be nonnegative");
}

namespace {

double single_radius(const EventLaw& law) {
  law.validate();
  if (law.empty()) throw std::invalid_argument("contact process: law must be nonempty");
  const double r = law.atoms.front().radius;
  for (const auto& atom : law.atoms)
    if (atom.radius != r) throw std::invalid_argument("contact process: law must have a single radius");
  return r;
}

}  // namespace

double contact_infection_rate(const EventLaw& law) {
  const double r = single_radius(law);
  double au = 0.0;
  for (const auto& atom : law.atoms) au += atom.rate * atom.impact;
  return contact_constant(law.dimension) * std::pow(r, law.dimension) * au;
}

ContactSetup contact_setup(const EventLaw& law, double gamma, long long window) {
  ContactSetup s;
  s.dimension = law.dimension;
  s.gamma = gamma;
  s.radius = single_radius(law);
  s.infection_rate = contact_infection_rate(law);
  s.window = window;
  s.validate();
  return s;
}

SiteCoords cube_of(const Point& x, double edge, int dim) {
  SiteCoords s{0, 0, 0};
  for (int i = 0; i < dim; ++i) s[i] = static_cast<long long>(std::floor(x[i] / edge + 0.5));
  return s;
}

bool in_cube_interior(const Point& x, double edge, int dim) {
  for (int i = 0; i < dim; ++i) {
    const double local = x[i] / edge;
    if (!(std::abs(local - std::floor(local + 0.5)) < 0.5)) return false;
  }
  return true;
}

ContactTrajectory run_contact(const ContactSetup& setup, double horizon, SeedSpec seed) {
  setup.validate();
  const int d = setup.dimension;
  const double total = setup.gamma + 2.0 * d * setup.infection_rate;
  struct Clock {
    Rng rng;
    double next = 0.0;
    double kind = 0.0;  // uniform deciding recovery or which arrow
  };
  std::unordered_map<SiteCoords, Clock, SiteHash> clocks;
  std::unordered_map<SiteCoords, bool, SiteHash> occupied;
  using Entry = std::pair<double, SiteCoords>;
  auto later = [](const Entry& a, const Entry& b) { return a.first > b.first; };
  std::priority_queue<Entry, std::vector<Entry>, decltype(later)> queue(later);

  auto draw = [&](Clock& c) {
    c.next += c.rng.exponential(total);
    c.kind = c.rng.uniform();
  };
  auto occupy = [&](const SiteCoords& s, double t) {
    occupied[s] = true;
    if (total <= 0.0) return;
    auto it = clocks.find(s);
    if (it == clocks.end()) {
      Clock c{Rng::for_stream(seed, StreamTag::kContactSite, site_key(s)), 0.0, 0.0};
      draw(c);
      it = clocks.emplace(s, c).first;
    }
    while (it->second.next <= t) draw(it->second);
    queue.emplace(it->second.next, s);
  };

  ContactTrajectory traj;
  std::size_t count = 1;
  occupy(SiteCoords{0, 0, 0}, 0.0);
  traj.occupied.emplace_back(0.0, count);
  while (!queue.empty() && count > 0) {
    const auto [t, s] = queue.top();
    queue.pop();
    if (t > horizon) break;
    Clock& c = clocks.at(s);
    if (!occupied[s] || c.next != t) continue;
    ++traj.events;
    const double kind = c.kind;
    draw(c);
    if (kind * total < setup.gamma) {
      occupied[s] = false;
      --count;
      traj.occupied.emplace_back(t, count);
      continue;
    }
    queue.emplace(c.next, s);
    const auto arrow = std::min<long long>(
        static_cast<long long>((kind * total - setup.gamma) / setup.infection_rate), 2LL * d - 1);
    SiteCoords target = s;
    target[static_cast<std::size_t>(arrow / 2)] += (arrow % 2 == 0) ? 1 : -1;
    if (!in_window(target, setup.window, d) || occupied[target]) continue;
    occupy(target, t);
    ++count;
    traj.occupied.emplace_back(t, count);
  }
  traj.survived = count > 0;
  return traj;
}

void ViolationReport::merge(const ViolationReport& other) {
  runs += other.runs;
  violations += other.violations;
  checks += other.checks;
  if (!first_t && other.first_t) {
    first_t = other.first_t;
    first_where = other.first_where;
  }
}

Json to_json(const ViolationReport& report) {
  Json first = nullptr;
  if (report.first_t) first = Json{{"t", *report.first_t}, {"where", report.first_where}};
  return Json{{"runs", report.runs}, {"violations", report.violations}, {"first_violation", first}};
}

ViolationReport run_coupled_contact_dual(const EventLaw& law, double gamma, double horizon, SeedSpec seed,
                                         long long window) {
  const ContactSetup setup = contact_setup(law, gamma, window);
  const int d = law.dimension;
  const double edge = setup.cube_edge();
  const double r = setup.radius;
  Rng rng = Rng::for_stream(seed, StreamTag::kCoupling);
  AtomSet atoms(d, r);

  std::vector<double> weight;
  double total = 0.0;
  for (const auto& atom : law.atoms) {
    total += atom.rate * ball_volume(atom.radius, d);
    weight.push_back(total);
  }

  std::unordered_map<SiteCoords, std::uint64_t, SiteHash> site_atom;  // occupied site -> paired atom
  std::unordered_map<std::uint64_t, SiteCoords> atom_site;
  std::unordered_map<SiteCoords, std::size_t, SiteHash> cube_count;  // atoms in cube interiors

  auto add_atom = [&](const DualAtom& a) {
    atoms.add(a);
    if (in_cube_interior(a.x, edge, d)) ++cube_count[cube_of(a.x, edge, d)];
  };
  auto remove_atom = [&](std::uint64_t uid) {
    const DualAtom a = *atoms.find(uid);
    if (in_cube_interior(a.x, edge, d)) {
      auto it = cube_count.find(cube_of(a.x, edge, d));
      if (--it->second == 0) cube_count.erase(it);
    }
    atoms.remove(uid);
  };
  auto death = [&](double now) {
    return gamma > 0.0 ? now + rng.exponential(gamma) : std::numeric_limits<double>::infinity();
  };

  ViolationReport report;
  report.runs = 1;
  double t = 0.0;
  auto check_site = [&](const SiteCoords& s) {
    ++report.checks;
    if (!site_atom.count(s)) return;
    const auto it = cube_count.find(s);
    if (it == cube_count.end() || it->second == 0) {
      ++report.violations;
      if (!report.first_t) {
        report.first_t = t;
        report.first_where = describe(s, d);
      }
    }
  };
  auto check_totals = [&] {
    ++report.checks;
    if (site_atom.size() > atoms.size()) {
      ++report.violations;
      if (!report.first_t) {
        report.first_t = t;
        report.first_where = "total";
      }
    }
  };

  std::uint64_t next_uid = 0;
  {
    DualAtom root;
    root.uid = next_uid++;
    root.death_time = death(0.0);
    add_atom(root);
    site_atom[SiteCoords{0, 0, 0}] = root.uid;
    atom_site[root.uid] = SiteCoords{0, 0, 0};
  }
  std::size_t events = 0;
  while (!atoms.empty()) {
    const auto [td, uid] = atoms.next_death();
    const double tp = t + rng.exponential(static_cast<double>(atoms.size()) * total);
    if (std::min(td, tp) > horizon) break;
    if (td <= tp) {
      t = td;
      const DualAtom dead = *atoms.find(uid);
      remove_atom(uid);
      if (const auto it = atom_site.find(uid); it != atom_site.end()) {
        site_atom.erase(it->second);
        atom_site.erase(it);
      }
      if (in_cube_interior(dead.x, edge, d)) check_site(cube_of(dead.x, edge, d));
      check_totals();
      continue;
    }
    t = tp;
    std::size_t cls = 0;
    if (weight.size() > 1) {
      const double pick = rng.uniform() * total;
      cls = std::min<std::size_t>(
          static_cast<std::size_t>(std::upper_bound(weight.begin(), weight.end(), pick) - weight.begin()),
          weight.size() - 1);
    }
    const auto& ev = law.atoms[cls];
    const auto& from = atoms.atoms()[rng.below(atoms.size())];
    const Point off = sample_ball_offset(rng, d, r);
    Point z;
    for (int i = 0; i < d; ++i) z[i] = from.x[i] + off[i];
    const std::size_t k = atoms.count_within(z, r);
    if (!rng.bernoulli(1.0 / static_cast<double>(k))) continue;
    const Point off2 = sample_ball_offset(rng, d, r);
    Point p;
    for (int i = 0; i < d; ++i) p[i] = z[i] + off2[i];

    const SiteCoords ci = cube_of(z, edge, d);
    const SiteCoords cj = cube_of(p, edge, d);
    long long manhattan = 0;
    for (int i = 0; i < d; ++i) manhattan += std::llabs(ci[i] - cj[i]);
    const bool case_one = manhattan == 1 && in_cube_interior(z, edge, d) && in_cube_interior(p, edge, d) &&
                          site_atom.count(ci) && !site_atom.count(cj) && in_window(cj, window, d);
    const double v = rng.uniform();
    bool dual_birth = false;
    bool contact_birth = false;
    if (case_one) {
      const double both = ev.impact;
      const double dual_only = (1.0 - ev.impact) * branching_probability(ev.impact, k - 1);
      contact_birth = v < both;
      dual_birth = v < both + dual_only;
    } else {
      dual_birth = v < branching_probability(ev.impact, k);
    }
    if (!dual_birth) continue;
    DualAtom born;
    born.uid = next_uid++;
    born.x = p;
    born.death_time = death(t);
    add_atom(born);
    if (contact_birth) {
      site_atom[cj] = born.uid;
      atom_site[born.uid] = cj;
      check_site(cj);
    }
    check_totals();
    if (++events > 50'000'000) throw std::overflow_error("coupled contact run exceeded its event cap");
  }
  for (const auto& entry : site_atom) check_site(entry.first);
  check_totals();
  return report;
}

std::vector<double> jump_sizes(const EventLaw& law, double cell_edge) {
  std::vector<double> out;
  for (const auto& atom : law.atoms) {
    const double volume = cell_edge > 0.0
                              ? static_cast<double>(grid_ball_count(atom.radius, cell_edge, law.dimension)) *
                                    std::pow(cell_edge, law.dimension)
                              : ball_volume(atom.radius, law.dimension);
    out.push_back(atom.impact * volume);
  }
  return out;
}

JumpTrajectory run_sjp(double x0, const EventLaw& law, const std::vector<double>& sample_times, SeedSpec seed,
                       double cell_edge) {
  if (!(x0 >= 0.0)) throw std::invalid_argument("run_sjp: x0 must be nonnegative");
  law.validate();
  const auto sizes = jump_sizes(law, cell_edge);
  const double rate = law.total_rate();
  std::vector<double> times = sample_times;
  std::sort(times.begin(), times.end());
  Rng rng = Rng::for_stream(seed, StreamTag::kJump);
  JumpTrajectory traj;
  double x = x0;
  double t = 0.0;
  std::size_t next_sample = 0;
  for (;;) {
    const double total = x * rate;
    const double t_next = total > 0.0 ? t + rng.exponential(total) : std::numeric_limits<double>::infinity();
    while (next_sample < times.size() && times[next_sample] < t_next) {
      traj.times.push_back(times[next_sample]);
      traj.values.push_back(x);
      ++next_sample;
    }
    if (next_sample == times.size()) break;
    t = t_next;
    std::size_t cls = 0;
    if (law.atoms.size() > 1) {
      double pick = rng.uniform() * rate;
      while (cls + 1 < law.atoms.size() && pick >= law.atoms[cls].rate) pick -= law.atoms[cls++].rate;
    }
    x += sizes[cls];
    ++traj.jumps;
  }
  return traj;
}

ViolationReport run_coupled_sjp_forward(const ForwardConfig& config, SeedSpec seed) {
  if (!config.init.finite_mass())
    throw std::invalid_argument("run_coupled_sjp_forward: needs a finite-mass initial condition");
  ForwardSimulator sim(config, seed);
  const auto sizes = jump_sizes(config.law, config.cell_edge);
  const double rate = config.law.total_rate();
  Rng rng = Rng::for_stream(seed, StreamTag::kJump);
  double x = sim.field().infected_mass();

  std::vector<double> probe_times;
  for (const auto& probe : config.probes) probe_times.insert(probe_times.end(), probe.times.begin(), probe.times.end());
  probe_times.push_back(config.horizon);
  std::sort(probe_times.begin(), probe_times.end());

  ViolationReport report;
  report.runs = 1;
  auto check = [&](double t) {
    ++report.checks;
    const double mass = sim.field().infected_mass();
    if (mass > x * (1.0 + 1e-12)) {
      ++report.violations;
      if (!report.first_t) {
        report.first_t = t;
        report.first_where = "mass " + std::to_string(mass) + " > X " + std::to_string(x);
      }
    }
  };
  auto pick_class = [&] {
    std::size_t cls = 0;
    if (config.law.atoms.size() > 1) {
      double pick = rng.uniform() * rate;
      while (cls + 1 < config.law.atoms.size() && pick >= config.law.atoms[cls].rate)
        pick -= config.law.atoms[cls++].rate;
    }
    return cls;
  };

  check(0.0);
  double t = 0.0;
  double t_comp = x * rate > 0.0 ? rng.exponential(x * rate) : std::numeric_limits<double>::infinity();
  std::size_t next_probe = 0;
  for (;;) {
    const double t_fwd = sim.peek().t;
    const double t_probe = next_probe < probe_times.size() ? probe_times[next_probe]
                                                           : std::numeric_limits<double>::infinity();
    const double t_next = std::min({t_fwd, t_comp, t_probe});
    if (t_next > config.horizon) break;
    if (t_probe == t_next) {
      sim.advance_to(t_probe);
      t = t_probe;
      check(t);
      ++next_probe;
      continue;
    }
    if (t_comp < t_fwd) {
      t = t_comp;
      sim.advance_to(t);
      const double mass = sim.field().running_mass();
      if (rng.bernoulli(std::max(0.0, (x - mass) / x))) x += sizes[pick_class()];
      t_comp = t + rng.exponential(x * rate);
      continue;
    }
    t = t_fwd;
    const auto outcome = sim.step();
    if (outcome.parent_infected) {
      const double old_x = x;
      x += sizes[static_cast<std::size_t>(outcome.event.atom_index)];
      check(t);
      // X jumped: restart the proposal clock at the new rate.
      if (x != old_x) t_comp = t + rng.exponential(x * rate);
    }
  }
  return report;
}

}  // namespace epislfv
