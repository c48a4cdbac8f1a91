#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "epislfv/couplings.hpp"
#include "epislfv/ensemble.hpp"
#include "oracles.hpp"

using namespace epislfv;

TEST_CASE("contact geometry") {
  const EventLaw law(2, {{1.0, 3.0, 0.3}});
  const auto s = contact_setup(law, 1.0, 10);
  CHECK(s.cube_edge() == doctest::Approx(3.0 / std::sqrt(5.0)));
  CHECK(s.infection_rate == doctest::Approx(9.0 * 0.3 / (25.0 * std::numbers::pi)));
  CHECK_THROWS_AS(contact_infection_rate(EventLaw(2, {{1, 1, 0.5}, {1, 2, 0.5}})), std::invalid_argument);

  CHECK(cube_of(Point{0.49, -0.49}, 1.0, 2) == SiteCoords{0, 0, 0});
  CHECK(cube_of(Point{0.51, 1.6}, 1.0, 2) == SiteCoords{1, 2, 0});
  CHECK(in_cube_interior(Point{0.2, 0.3}, 1.0, 2));
  CHECK_FALSE(in_cube_interior(Point{0.5, 0.3}, 1.0, 2));
}

TEST_CASE("contact process without infection is a pure death chain") {
  ContactSetup s;
  s.dimension = 2;
  s.gamma = 1.0;
  s.radius = 1.0;
  s.infection_rate = 0.0;
  RunningStats alive;
  for (std::uint64_t i = 0; i < 10000; ++i) alive.add(run_contact(s, 1.0, {1, i}).survived ? 1.0 : 0.0);
  CHECK(oracle::within(alive.mean, alive.standard_error(), std::exp(-1.0)));
}

TEST_CASE("supercritical contact process survives") {
  ContactSetup s;
  s.dimension = 2;
  s.gamma = 1.0;
  s.radius = 1.0;
  s.infection_rate = 3.0;
  s.window = 30;
  int survived = 0;
  for (std::uint64_t i = 0; i < 200; ++i) survived += run_contact(s, 20.0, {2, i}).survived;
  CHECK(survived > 100);
}

TEST_CASE("larger windows never survive less on shared seeds") {
  ContactSetup small;
  small.dimension = 2;
  small.gamma = 1.0;
  small.radius = 1.0;
  small.infection_rate = 0.6;
  small.window = 2;
  ContactSetup big = small;
  big.window = 6;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto a = run_contact(small, 5.0, {3, i});
    const auto b = run_contact(big, 5.0, {3, i});
    CHECK(a.survived <= b.survived);
  }
}

TEST_CASE("contact process stays below the dual") {
  ViolationReport total;
  for (std::uint64_t i = 0; i < 20; ++i) total.merge(run_coupled_contact_dual(EventLaw(2, {{1.0, 3.0, 0.3}}), 1.0, 3.0, {4, i}));
  CHECK(total.runs == 20);
  CHECK(total.violations == 0);
  CHECK(total.checks > 0);
  const auto j = to_json(total);
  CHECK(j.at("first_violation").is_null());
  CHECK(j.at("runs") == 20);
}

TEST_CASE("jump process") {
  const EventLaw law(2, {{1.0, 4.0, 0.03}});
  const auto sizes = jump_sizes(law);
  CHECK(sizes[0] == doctest::Approx(0.03 * 16 * std::numbers::pi));
  CHECK(jump_sizes(law, 1.0)[0] == doctest::Approx(0.03 * 49));

  const auto zero = run_sjp(0.0, law, {1.0, 2.0}, {1, 0});
  CHECK(zero.values == std::vector<double>{0.0, 0.0});
  const auto flat = run_sjp(2.5, EventLaw(2, {}), {1.0}, {1, 0});
  CHECK(flat.values[0] == 2.5);
  CHECK_THROWS_AS(run_sjp(-1.0, law, {1.0}, {1, 0}), std::invalid_argument);

  RunningStats x;
  for (std::uint64_t i = 0; i < 10000; ++i) x.add(run_sjp(1.0, law, {1.0}, {2, i}).values[0]);
  CHECK(oracle::within(x.mean, x.standard_error(), std::exp(0.03 * 16 * std::numbers::pi)));
  CHECK(x.mean == doctest::Approx(4.517).epsilon(0.05));
}

TEST_CASE("jump process dominates forward mass") {
  ForwardConfig f;
  f.law = EventLaw(2, {{0.5, 2.0, 0.3}});
  f.gamma = 0.5;
  f.region = Region({24, 24});
  f.init = InitialCondition::epidemic(BallShape{Point{12, 12}, 3.0}, 0.9);
  f.horizon = 4.0;
  f.probes = {{"all", WholeSpace{}, {0.5, 1.0, 2.0, 3.0, 4.0}}};
  for (std::uint64_t i = 0; i < 20; ++i) CHECK(run_coupled_sjp_forward(f, {5, i}).violations == 0);

  f.law = EventLaw(2, {});
  CHECK(run_coupled_sjp_forward(f, {6, 0}).violations == 0);
  f.init = InitialCondition::endemic(0.5);
  CHECK_THROWS_AS(run_coupled_sjp_forward(f, {6, 0}), std::invalid_argument);
}
