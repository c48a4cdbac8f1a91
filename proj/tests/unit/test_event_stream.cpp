#include <doctest.h>

#include <array>
#include <cmath>
#include <sstream>

#include "epislfv/ensemble.hpp"
#include "epislfv/event_stream.hpp"
#include "oracles.hpp"

using namespace epislfv;

TEST_CASE("total event rate") {
  const EventLaw law(2, {{1.0, 4.0, 0.03}});
  CHECK(total_event_rate(law, Region({200, 200})) == doctest::Approx(40000));
  CHECK(total_event_rate(law, Region({200, 200}, BoundaryMode::kTruncated)) == doctest::Approx(43264));
  Region plain({200, 200}, BoundaryMode::kTruncated);
  plain.dilated_centers = false;
  CHECK(total_event_rate(law, plain) == doctest::Approx(40000));
  CHECK(total_event_rate(EventLaw(2, {}), Region({200, 200})) == 0.0);
}

TEST_CASE("empty law never fires") {
  EventStream s(EventLaw(2, {}), Region({10, 10}), Rng(1));
  CHECK(std::isinf(s.next().t));
}

TEST_CASE("same seed gives the same stream") {
  const EventLaw law(2, {{1.0, 2.0, 0.5}, {0.5, 1.0, 0.2}});
  const Region region({30, 20});
  EventStream a(law, region, Rng::for_stream({5, 3}, StreamTag::kEvents));
  EventStream b(law, region, Rng::for_stream({5, 3}, StreamTag::kEvents));
  EventStream c(law, region, Rng::for_stream({5, 4}, StreamTag::kEvents));
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next();
    const auto y = b.next();
    const auto w = c.next();
    CHECK(x.t == y.t);
    CHECK(x.z == y.z);
    CHECK(x.p == y.p);
    CHECK(x.a == y.a);
    CHECK(x.atom_index == y.atom_index);
    differs = differs || x.t != w.t;
  }
  CHECK(differs);
}

TEST_CASE("inter-arrival times and parent offsets") {
  const double r = 3.0;
  const EventLaw law(2, {{0.2, r, 0.5}});
  const Region region({50, 50});
  EventStream s(law, region, Rng(2024));
  RunningStats gaps;
  RunningStats radial;
  double last = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto ev = s.next();
    gaps.add(ev.t - last);
    last = ev.t;
    radial.add(std::sqrt(region.distance_sq(ev.z, ev.p)));
    REQUIRE(region.contains(ev.p));
    REQUIRE(ev.a > 0.0);
    REQUIRE(ev.a < 1.0);
  }
  CHECK(oracle::within(gaps.mean, gaps.standard_error(), 1.0 / s.rate()));
  CHECK(oracle::within(radial.mean, radial.standard_error(), 2.0 * r / 3.0));
}

TEST_CASE("marks follow the atom rates") {
  const EventLaw law(1, {{1.0, 1.0, 0.1}, {2.0, 2.0, 0.2}, {5.0, 3.0, 0.3}});
  EventStream s(law, Region({100}), Rng(99));
  std::array<double, 3> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto ev = s.next();
    counts[static_cast<std::size_t>(ev.atom_index)] += 1;
    REQUIRE(ev.r == law.atoms[static_cast<std::size_t>(ev.atom_index)].radius);
  }
  const std::array<double, 3> expected{n / 8.0, 2 * n / 8.0, 5 * n / 8.0};
  double chi2 = 0.0;
  for (std::size_t k = 0; k < 3; ++k) chi2 += (counts[k] - expected[k]) * (counts[k] - expected[k]) / expected[k];
  CHECK(chi2 < oracle::chi_square_upper(2, 3.09));
}

TEST_CASE("torus centres are exchangeable across sub-boxes") {
  EventStream s(EventLaw(2, {{1.0, 1.0, 0.1}}), Region({40, 40}), Rng(3));
  std::array<double, 16> counts{};
  const int n = 64000;
  for (int i = 0; i < n; ++i) {
    const auto ev = s.next();
    const auto bx = static_cast<std::size_t>(ev.z[0] / 10.0);
    const auto by = static_cast<std::size_t>(ev.z[1] / 10.0);
    counts[bx + 4 * by] += 1;
  }
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - n / 16.0) * (c - n / 16.0) / (n / 16.0);
  CHECK(chi2 < oracle::chi_square_upper(15, 3.09));
}

TEST_CASE("truncated parents stay in the box") {
  const Region region({10, 10}, BoundaryMode::kTruncated);
  EventStream s(EventLaw(2, {{1.0, 3.0, 0.5}}), region, Rng(4));
  for (int i = 0; i < 20000; ++i) {
    const auto ev = s.next();
    REQUIRE(region.contains(ev.p));
    REQUIRE(euclidean_distance_sq(ev.z, ev.p, 2) <= 9.0 + 1e-12);
    REQUIRE(ev.z[0] >= -3.0);
    REQUIRE(ev.z[0] <= 13.0);
  }
}

TEST_CASE("event log csv") {
  std::ostringstream os;
  write_event_log_header(os, 2);
  CHECK(os.str() == "t,zx,zy,r,u,px,py,a\n");
  AugmentedEvent ev;
  ev.t = 0.5;
  ev.r = 1;
  ev.u = 0.25;
  write_event_log_row(os, ev, 2);
  CHECK(os.str().find("0.5,0,0,1,0.25,0,0,0") != std::string::npos);
}
