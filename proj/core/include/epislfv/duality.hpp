#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "epislfv/ancestral_sim.hpp"
#include "epislfv/event_law.hpp"
#include "epislfv/event_stream.hpp"
#include "epislfv/forward_sim.hpp"
#include "epislfv/geometry.hpp"
#include "epislfv/json_io.hpp"

namespace epislfv {

/// E[prod_j omega_t(x_j)] computed forward and through the dual.
struct DualityCase {
  std::string name;
  std::vector<Point> samples;
  InitialCondition init;
  EventLaw law;
  double gamma = 1.0;
  double t = 1.0;
  Region region;
  double cell_edge = 1.0;
  std::size_t forward_replicates = 1000;
  std::size_t dual_replicates = 1000;
  std::uint64_t forward_seed = 1;
  std::uint64_t dual_seed = 2;
  DualMode dual_mode = DualMode::kGridMatched;
  /// Added to the 3-sigma band; meant for continuous-dual comparisons.
  double allowance = 0.0;

  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t replicates = 0;
};

/// Mean over forward replicates of the product of omega_t at the cells
/// containing the sample points.
Estimate lhs_estimate(const DualityCase& c, unsigned threads = 1);
/// Mean over dual replicates started at the sample points of the product of
/// omega_0 over the atoms alive at time t.
Estimate rhs_estimate(const DualityCase& c, unsigned threads = 1);

/// Dual side without events: atoms only die, each surviving to t with
/// probability exp(-gamma t). The expectation is summed exactly over the
/// subsets of surviving atoms (at most 20 samples). Throws for a nonempty law.
double rhs_event_free(const DualityCase& c);

struct DualityReport {
  std::string name;
  double lhs = 0.0;
  double se_lhs = 0.0;
  double rhs = 0.0;
  double se_rhs = 0.0;
  double z = 0.0;
  bool pass = false;
};

/// pass iff |lhs - rhs| <= 3 sqrt(se_lhs^2 + se_rhs^2) + allowance.
DualityReport duality_check(const DualityCase& c, unsigned threads = 1);
DualityReport compare_estimates(const std::string& name, const Estimate& lhs, const Estimate& rhs, double allowance);
Json to_json(const DualityReport& report);
DualityCase duality_case_from_json(const Json& j);

/// Forward E<1_A, 1 - omega_t> from omega_0 = 0 against Vol(A) P(N_t > 0)
/// from the grid-matched dual on the same torus.
struct EndemicCheck {
  EventLaw law;
  double gamma = 1.0;
  Region region;
  double cell_edge = 1.0;
  Shape window;
  double t = 1.0;
  std::size_t forward_replicates = 1000;
  std::size_t dual_replicates = 1000;
  std::uint64_t forward_seed = 11;
  std::uint64_t dual_seed = 12;
};
DualityReport endemic_limit_check(const EndemicCheck& check, unsigned threads = 1);

struct RegimeSeries {
  std::string observable;
  std::vector<double> t;
  std::vector<double> mean;
  std::vector<double> se;
  double tail_min = 0.0;
  double tail_max = 0.0;
};

/// Extrema of `values` over samples with t >= 2/3 of the last time.
std::pair<double, double> tail_extrema(const std::vector<double>& t, const std::vector<double>& values);

/// Descriptive long-horizon statistics: forward probe means (one series per
/// probe), P(N_t > 0) and P(Xi_t(B(origin, n)) > 0) for each radius n.
std::vector<RegimeSeries> survival_regime_report(const ForwardConfig& forward, std::size_t forward_replicates,
                                                 std::uint64_t forward_seed, const DualConfig& dual,
                                                 const std::vector<double>& dual_times,
                                                 const std::vector<double>& ball_radii, std::size_t dual_replicates,
                                                 std::uint64_t dual_seed, unsigned threads = 1,
                                                 const Point& origin = {});

}  // namespace epislfv
