#include "epislfv/duality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epislfv/ensemble.hpp"

namespace epislfv {

void DualityCase::validate() const {
  if (samples.empty()) throw std::invalid_argument("DualityCase: need at least one sample point");
  if (!(t >= 0.0)) throw std::invalid_argument("DualityCase: t must be nonnegative");
  law.validate();
  region.validate();
  init.validate();
  if (law.dimension != region.dimension) throw std::invalid_argument("DualityCase: dimension mismatch");
  for (const auto& x : samples)
    if (!region.contains(x)) throw std::invalid_argument("DualityCase: sample point outside the region");
  if (forward_replicates == 0 || dual_replicates == 0)
    throw std::invalid_argument("DualityCase: replicate counts must be positive");
}

namespace {

Estimate to_estimate(const std::vector<double>& values) {
  const auto s = summarize(values);
  return {s.mean, s.standard_error(), s.count};
}

ForwardConfig forward_config(const DualityCase& c) {
  ForwardConfig f;
  f.law = c.law;
  f.gamma = c.gamma;
  f.region = c.region;
  f.cell_edge = c.cell_edge;
  f.init = c.init;
  f.horizon = c.t > 0.0 ? c.t : 1.0;
  return f;
}

}  // namespace

Estimate lhs_estimate(const DualityCase& c, unsigned threads) {
  c.validate();
  const ForwardConfig config = forward_config(c);
  const Grid grid(c.region, c.cell_edge);
  std::vector<std::size_t> cells;
  for (const auto& x : c.samples) cells.push_back(grid.index_of(x));
  const auto initial = c.init.rasterize(grid);
  if (c.t == 0.0) {
    double prod = 1.0;
    for (std::size_t cell : cells) prod *= 1.0 - initial[cell];
    return {prod, 0.0, c.forward_replicates};
  }
  const auto values = map_replicates(c.forward_replicates, threads, [&](std::size_t i) {
    ForwardSimulator sim(config, initial, {c.forward_seed, i});
    sim.advance_to(c.t);
    double prod = 1.0;
    for (std::size_t cell : cells) prod *= sim.field().healthy(cell);
    return prod;
  });
  return to_estimate(values);
}

Estimate rhs_estimate(const DualityCase& c, unsigned threads) {
  c.validate();
  const Grid grid(c.region, c.cell_edge);
  DualConfig dual = c.dual_mode == DualMode::kGridMatched ? DualConfig::grid_matched(c.law, c.gamma, grid)
                                                          : DualConfig::continuous(c.law, c.gamma);
  std::vector<double> healthy0;
  if (c.dual_mode == DualMode::kGridMatched) {
    healthy0 = c.init.rasterize(grid);
    for (double& v : healthy0) v = 1.0 - v;
  }
  // The continuous dual lives in the plane; omega_0 is read without wrapping.
  Region plane = c.region;
  plane.boundary = BoundaryMode::kTruncated;
  const auto values = map_replicates(c.dual_replicates, threads, [&](std::size_t i) {
    AncestralSimulator sim(dual, c.samples, Rng::for_stream({c.dual_seed, i}, StreamTag::kDual));
    sim.run_until(c.t);
    double prod = 1.0;
    for (const auto& atom : sim.atoms()) {
      prod *= c.dual_mode == DualMode::kGridMatched ? healthy0[atom.cell] : 1.0 - c.init.infected_at(atom.x, plane);
    }
    return prod;
  });
  return to_estimate(values);
}

double rhs_event_free(const DualityCase& c) {
  c.validate();
  if (!c.law.empty()) throw std::invalid_argument("rhs_event_free: the law must be empty");
  if (c.samples.size() > 20) throw std::invalid_argument("rhs_event_free: at most 20 sample points");
  const Grid grid(c.region, c.cell_edge);
  const auto initial = c.init.rasterize(grid);
  std::vector<double> healthy0;
  for (const auto& x : c.samples) healthy0.push_back(1.0 - initial[grid.index_of(x)]);
  const double q = std::exp(-c.gamma * c.t);
  const std::size_t k = healthy0.size();
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    double term = 1.0;
    for (std::size_t j = 0; j < k; ++j) term *= (mask >> j & 1U) ? q * healthy0[j] : 1.0 - q;
    total += term;
  }
  return total;
}

DualityReport compare_estimates(const std::string& name, const Estimate& lhs, const Estimate& rhs, double allowance) {
  DualityReport r;
  r.name = name;
  r.lhs = lhs.mean;
  r.se_lhs = lhs.se;
  r.rhs = rhs.mean;
  r.se_rhs = rhs.se;
  const double se = std::sqrt(lhs.se * lhs.se + rhs.se * rhs.se);
  const double diff = lhs.mean - rhs.mean;
  r.z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff));
  r.pass = std::abs(diff) <= 3.0 * se + allowance;
  return r;
}

DualityReport duality_check(const DualityCase& c, unsigned threads) {
  return compare_estimates(c.name, lhs_estimate(c, threads), rhs_estimate(c, threads), c.allowance);
}

Json to_json(const DualityReport& report) {
  auto finite = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return Json{{"case", report.name}, {"lhs", report.lhs},   {"se_lhs", report.se_lhs}, {"rhs", report.rhs},
              {"se_rhs", report.se_rhs}, {"z", finite(report.z)}, {"pass", report.pass}};
}

DualityCase duality_case_from_json(const Json& j) {
  DualityCase c;
  c.name = j.value("name", std::string("case"));
  c.law = event_law_from_json(j.at("law"));
  c.region = region_from_json(j.at("region"));
  const int dim = c.region.dimension;
  c.gamma = j.at("gamma").get<double>();
  c.t = j.at("t").get<double>();
  c.cell_edge = j.value("h", 1.0);
  c.init = initial_condition_from_json(j.at("init"), dim);
  for (const auto& p : j.at("samples")) c.samples.push_back(point_from_json(p, dim));
  c.forward_replicates = j.value("forward_replicates", std::size_t{1000});
  c.dual_replicates = j.value("dual_replicates", std::size_t{1000});
  c.forward_seed = j.value("forward_seed", std::uint64_t{1});
  c.dual_seed = j.value("dual_seed", std::uint64_t{2});
  c.allowance = j.value("allowance", 0.0);
  if (j.value("dual_mode", std::string("grid")) == "continuous") c.dual_mode = DualMode::kContinuous;
  c.validate();
  return c;
}

DualityReport endemic_limit_check(const EndemicCheck& check, unsigned threads) {
  ForwardConfig f;
  f.law = check.law;
  f.gamma = check.gamma;
  f.region = check.region;
  f.cell_edge = check.cell_edge;
  f.init = InitialCondition::endemic(1.0);
  f.horizon = check.t > 0.0 ? check.t : 1.0;
  f.validate();
  const Grid grid(check.region, check.cell_edge);
  const auto cells = grid.rasterize(check.window);
  if (cells.empty()) throw std::invalid_argument("endemic_limit_check: window covers no cell");
  const double volume = static_cast<double>(cells.size()) * grid.cell_volume();

  const auto forward = map_replicates(check.forward_replicates, threads, [&](std::size_t i) {
    ForwardSimulator sim(f, {check.forward_seed, i});
    if (check.t > 0.0) sim.advance_to(check.t);
    return sim.field().infected_mass(cells);
  });
  const auto dual = DualConfig::grid_matched(check.law, check.gamma, grid);
  const auto survival = survival_prob(dual, check.t, check.dual_replicates, check.dual_seed, threads,
                                      grid.cell_center(cells.front()));
  Estimate rhs{volume * survival.p, volume * survival.se, survival.replicates};
  return compare_estimates("endemic_limit", to_estimate(forward), rhs, 0.0);
}

std::pair<double, double> tail_extrema(const std::vector<double>& t, const std::vector<double>& values) {
  if (t.empty() || t.size() != values.size()) throw std::invalid_argument("tail_extrema: bad series");
  const double cut = t.back() * 2.0 / 3.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < cut) continue;
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
  }
  return {lo, hi};
}

std::vector<RegimeSeries> survival_regime_report(const ForwardConfig& forward, std::size_t forward_replicates,
                                                 std::uint64_t forward_seed, const DualConfig& dual,
                                                 const std::vector<double>& dual_times,
                                                 const std::vector<double>& ball_radii, std::size_t dual_replicates,
                                                 std::uint64_t dual_seed, unsigned threads, const Point& origin) {
  std::vector<RegimeSeries> out;
  auto finish = [&](RegimeSeries s) {
    const auto [lo, hi] = tail_extrema(s.t, s.mean);
    s.tail_min = lo;
    s.tail_max = hi;
    out.push_back(std::move(s));
  };

  if (forward_replicates > 0 && !forward.probes.empty()) {
    const auto runs = map_replicates(forward_replicates, threads,
                                     [&](std::size_t i) { return run_forward(forward, {forward_seed, i}); });
    for (std::size_t p = 0; p < forward.probes.size(); ++p) {
      RegimeSeries s;
      s.observable = "forward_mass:" + forward.probes[p].id;
      for (double t : forward.probes[p].times) {
        RunningStats st;
        for (const auto& run : runs)
          for (const auto& sample : run.samples)
            if (sample.probe == p && sample.t == t) st.add(sample.infected_mass);
        s.t.push_back(t);
        s.mean.push_back(st.mean);
        s.se.push_back(st.standard_error());
      }
      finish(std::move(s));
    }
  }

  if (dual_replicates > 0 && !dual_times.empty()) {
    std::vector<double> times = dual_times;
    std::sort(times.begin(), times.end());
    const int d = dual.law.dimension;
    const auto* torus = dual.grid ? dual.grid->region().torus_sides() : nullptr;
    // Per replicate: survival indicator then one occupancy indicator per radius, per time.
    const std::size_t width = 1 + ball_radii.size();
    const auto runs = map_replicates(dual_replicates, threads, [&](std::size_t i) {
      AncestralSimulator sim(dual, {origin}, Rng::for_stream({dual_seed, i}, StreamTag::kDual));
      std::vector<double> row;
      for (double t : times) {
        sim.run_until(t);
        row.push_back(sim.extinct() ? 0.0 : 1.0);
        for (double n : ball_radii) {
          double hit = 0.0;
          for (const auto& atom : sim.atoms())
            if (shape_contains(BallShape{origin, n}, atom.x, d, torus)) {
              hit = 1.0;
              break;
            }
          row.push_back(hit);
        }
      }
      return row;
    });
    for (std::size_t col = 0; col < width; ++col) {
      RegimeSeries s;
      s.observable = col == 0 ? "dual_survival" : "dual_occupancy:" + std::to_string(ball_radii[col - 1]);
      for (std::size_t k = 0; k < times.size(); ++k) {
        RunningStats st;
        for (const auto& row : runs) st.add(row[k * width + col]);
        s.t.push_back(times[k]);
        s.mean.push_back(st.mean);
        s.se.push_back(st.standard_error());
      }
      finish(std::move(s));
    }
  }
  return out;
}

}  // namespace epislfv
