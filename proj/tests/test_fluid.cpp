#include <doctest.h>

#include <cmath>

#include "fnet/fixtures.hpp"
#include "fnet/fluid.hpp"

using namespace fnet;

namespace {
constexpr double kTol = 1e-9;
}

TEST_CASE("single queue drains at unit rate then holds") {
  const auto net = fixtures::single_queue();
  const auto sol = simulate_priority_fluid(net, {{0}}, {4.0}, 10.0);
  const auto rep = validate_fluid_solution(net, sol, kTol);
  CHECK(rep.ok());
  CHECK(check_non_idling(net, sol, kTol).ok());
  CHECK(total_queue(sol, 0.0) == doctest::Approx(4.0));
  CHECK(total_queue(sol, 2.0) == doctest::Approx(2.0));
  CHECK(total_queue(sol, 4.0) == doctest::Approx(0.0).epsilon(kTol));
  CHECK(total_queue(sol, 10.0) == doctest::Approx(0.0).epsilon(kTol));
  // Once empty the server works exactly half the time.
  const auto t6 = sol.t_at(6.0);
  const auto t4 = sol.t_at(4.0);
  CHECK(t6[0] - t4[0] == doctest::Approx(1.0));
}

TEST_CASE("exit-first priority destabilizes the crossover network") {
  const auto net = fixtures::rybko_stolyar();
  const auto sol =
      simulate_priority_fluid(net, fixtures::rs_exit_priority(), {0.0, 1.0, 0.0, 1.0}, 10.0);
  CHECK(validate_fluid_solution(net, sol, kTol).ok());
  CHECK(check_non_idling(net, sol, kTol).ok());
  CHECK(total_queue(sol, 10.0) == doctest::Approx(6.0));
  CHECK(total_queue(sol, 10.0) >= 2.9 * total_queue(sol, 0.0));
}

TEST_CASE("interpolation and breakpoint insertion") {
  FluidSolution sol;
  sol.append_point(0.0, {2.0}, {0.0});
  sol.append_point(4.0, {0.0}, {2.0});
  CHECK(sol.q_at(1.0)[0] == doctest::Approx(1.5));
  CHECK(sol.t_at(3.0)[0] == doctest::Approx(1.5));
  sol.insert_breakpoint(1.0);
  CHECK(sol.points() == 3);
  sol.insert_breakpoint(1.0 + 1e-14);  // within dedup tolerance
  CHECK(sol.points() == 3);
  CHECK_THROWS_AS(total_queue(sol, 5.0), std::invalid_argument);
}

TEST_CASE("validator flags broken solutions") {
  const auto net = fixtures::single_queue();

  FluidSolution neg;
  neg.append_point(0.0, {1.0}, {0.0});
  neg.append_point(1.0, {-0.5}, {0.5});
  CHECK(!validate_fluid_solution(net, neg, kTol).ok());

  // Conservation violated: queue grows with no arrivals unaccounted.
  FluidSolution bad;
  bad.append_point(0.0, {0.0}, {0.0});
  bad.append_point(1.0, {5.0}, {0.0});
  const auto rep = validate_fluid_solution(net, bad, kTol);
  CHECK(!rep.ok());
  CHECK(rep.max_violation > 1.0);

  // Allocation exceeding capacity.
  FluidSolution busy;
  busy.append_point(0.0, {1.0}, {0.0});
  busy.append_point(1.0, {1.0}, {1.5});
  CHECK(!validate_fluid_solution(net, busy, kTol).ok());

  // Idling with work present.
  FluidSolution idle;
  idle.append_point(0.0, {1.0}, {0.0});
  idle.append_point(1.0, {2.0}, {0.0});
  CHECK(validate_fluid_solution(net, idle, kTol).ok());
  CHECK(!check_non_idling(net, idle, kTol).ok());
}

TEST_CASE("scaling round trip") {
  const auto net = fixtures::rybko_stolyar();
  const auto sol =
      simulate_priority_fluid(net, fixtures::rs_exit_priority(), {0.0, 1.0, 0.0, 1.0}, 5.0);
  const auto scaled = scale_solution(sol, 2.5);
  CHECK(validate_fluid_solution(net, scaled, kTol).ok());
  CHECK(scaled.t_end() == doctest::Approx(12.5));
  CHECK(total_queue(scaled, 2.5) == doctest::Approx(2.5 * total_queue(sol, 1.0)));
  const auto back = scale_solution(scaled, 1.0 / 2.5);
  REQUIRE(back.points() == sol.points());
  for (size_t k = 0; k < sol.points(); ++k) {
    CHECK(back.times[k] == doctest::Approx(sol.times[k]).epsilon(1e-12));
    for (int c = 0; c < sol.dim(); ++c) {
      CHECK(back.q[k][c] == doctest::Approx(sol.q[k][c]).epsilon(1e-12));
      CHECK(back.t[k][c] == doctest::Approx(sol.t[k][c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("restrict, shift and linearize") {
  const auto net = fixtures::single_queue();
  const auto sol = simulate_priority_fluid(net, {{0}}, {4.0}, 10.0);

  auto cut = restrict_solution(sol, 1.0, 3.0);
  CHECK(cut.t_begin() == doctest::Approx(1.0));
  CHECK(cut.t_end() == doctest::Approx(3.0));
  CHECK(total_queue(cut, 2.0) == doctest::Approx(2.0));

  auto shifted = shift_to_zero(cut);
  CHECK(shifted.t_begin() == doctest::Approx(0.0));
  CHECK(shifted.t_at(0.0)[0] == doctest::Approx(0.0));
  CHECK(validate_fluid_solution(net, shifted, kTol).ok());

  auto lin = linearize_segment(sol, 2.0, 6.0);
  CHECK(lin.q_at(2.0)[0] == doctest::Approx(2.0));
  CHECK(lin.q_at(6.0)[0] == doctest::Approx(0.0).epsilon(kTol));
  CHECK(lin.q_at(4.0)[0] == doctest::Approx(1.0));  // straight line, not the kink
}

TEST_CASE("fluid json round trip") {
  const auto net = fixtures::single_queue();
  const auto sol = simulate_priority_fluid(net, {{0}}, {4.0}, 6.0);
  const auto back = fluid_from_json(fluid_to_json(net, sol));
  REQUIRE(back.points() == sol.points());
  CHECK(back.q_at(2.0)[0] == doctest::Approx(2.0));
  CHECK(validate_fluid_solution(net, back, kTol).ok());
}

TEST_CASE("bundled divergence witness is a valid non-idling solution") {
  const auto net = fixtures::rybko_stolyar();
  const auto sol = fixtures::rs_witness();
  CHECK(sol.t_begin() == 0.0);
  CHECK(sol.t_end() == 1.0);
  for (double v : sol.q.front()) CHECK(v == 0.0);
  CHECK(validate_fluid_solution(net, sol, kTol).ok());
  CHECK(check_non_idling(net, sol, kTol).ok());
  CHECK(total_queue(sol, 1.0) == doctest::Approx(0.5));
  // The norm grows linearly: ||Q(t)|| = t / 2 throughout.
  for (double x : {0.1, 0.25, 0.5, 0.75, 0.9})
    CHECK(total_queue(sol, x) == doctest::Approx(x / 2).epsilon(1e-9));
}
