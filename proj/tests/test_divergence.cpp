#include <doctest.h>

#include <cmath>

#include "fnet/divergence.hpp"
#include "fnet/fixtures.hpp"

using namespace fnet;

namespace {

// One-station network whose only class grows at unit rate under full service:
// arrivals at rate 2, service at rate 1.
NetworkSpec overloaded_single() {
  NetworkSpec net;
  net.stations = 1;
  TypeSpec t;
  t.route = {0};
  t.lambda = 2.0;
  t.arrival = DistSpec::exponential(2.0);
  t.stages = {{1.0, DistSpec::exponential(1.0)}};
  net.types = {t};
  net.finalize();
  return net;
}

Witness linear_growth_witness() {
  FluidSolution sol;
  sol.append_point(0.0, {0.0}, {0.0});
  sol.append_point(1.0, {1.0}, {1.0});
  return {sol};
}

}  // namespace

TEST_CASE("witness invariants are enforced") {
  const auto net = fixtures::rybko_stolyar();
  CHECK_NOTHROW(check_witness(net, {fixtures::rs_witness()}));

  Witness bad{fixtures::rs_witness()};
  bad.sol.q.front()[0] = 0.5;  // nonzero start
  CHECK_THROWS_AS(check_witness(net, bad), std::invalid_argument);

  Witness flat{fixtures::rs_witness()};
  for (auto& row : flat.sol.q) row.assign(4, 0.0);
  CHECK_THROWS_AS(check_witness(net, flat), std::invalid_argument);
}

TEST_CASE("normalize is a fixed point on a witness") {
  const auto net = fixtures::rybko_stolyar();
  const auto w = fixtures::rs_witness();
  const auto out = normalize_witness(net, w).sol;
  REQUIRE(out.points() == w.points());
  for (size_t k = 0; k < w.points(); ++k) {
    CHECK(out.times[k] == doctest::Approx(w.times[k]).epsilon(1e-12));
    for (int c = 0; c < 4; ++c)
      CHECK(out.q[k][c] == doctest::Approx(w.q[k][c]).epsilon(1e-12));
  }
}

TEST_CASE("normalize trims a leading zero stretch") {
  const auto net = fixtures::rybko_stolyar();
  const auto w = fixtures::rs_witness();
  // Zero state on [0,3] with pass-through allocations, then the witness.
  FluidSolution raw;
  raw.append_point(0.0, std::vector<double>(4, 0.0), std::vector<double>(4, 0.0));
  const std::vector<double> rho = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 2.0 / 3.0};
  std::vector<double> T(4);
  for (int c = 0; c < 4; ++c) T[c] = 3.0 * rho[c];
  raw.append_point(3.0, std::vector<double>(4, 0.0), T);
  for (size_t k = 1; k < w.points(); ++k) {
    std::vector<double> Trow(4);
    for (int c = 0; c < 4; ++c) Trow[c] = T[c] + w.t[k][c];
    raw.append_point(3.0 + w.times[k], w.q[k], Trow);
  }
  REQUIRE(validate_fluid_solution(net, raw, 1e-9).ok());
  REQUIRE(check_non_idling(net, raw, 1e-9).ok());

  const auto out = normalize_witness(net, raw).sol;
  CHECK(out.t_end() == doctest::Approx(1.0));
  CHECK(total_queue(out, 1.0) == doctest::Approx(0.5));
  CHECK(total_queue(out, 0.5) == doctest::Approx(0.25).epsilon(1e-9));

  FluidSolution stuck;
  stuck.append_point(0.0, std::vector<double>(4, 0.0), std::vector<double>(4, 0.0));
  stuck.append_point(1.0, std::vector<double>(4, 0.0), T);
  CHECK_THROWS_AS(normalize_witness(net, stuck), std::invalid_argument);
}

TEST_CASE("normalize undoes rescaling") {
  const auto net = fixtures::rybko_stolyar();
  const Witness w{fixtures::rs_witness()};
  const auto base = gamma_of_witness(net, w).gamma;
  for (double beta : {0.5, 2.0}) {
    const auto again = normalize_witness(net, scale_solution(w.sol, beta));
    CHECK(gamma_of_witness(net, again).gamma == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("certificate closed form for a linearly growing class") {
  const auto net = overloaded_single();
  const auto cert = gamma_of_witness(net, linear_growth_witness());
  // c_big = 13 (2 + 1)^2 + 1 = 118; norm is t, so the interval minimum sits at
  // its left endpoint 1/(4 c_big).
  CHECK(cert.gamma1 == doctest::Approx(1.0 / 472.0));
  CHECK(cert.gamma0 == doctest::Approx(1.0 / 472.0));
  CHECK(cert.gamma == doctest::Approx(1.0 / 944.0));
}

TEST_CASE("certificate for the crossover witness") {
  const auto net = fixtures::rybko_stolyar();
  const auto cert = gamma_of_witness(net, {fixtures::rs_witness()}, 10.0);
  CHECK(cert.gamma1 == doctest::Approx(1.0 / 163088.0).epsilon(1e-12));
  CHECK(cert.gamma0 == doctest::Approx(1.0 / 163088.0).epsilon(1e-12));
  CHECK(cert.gamma == doctest::Approx(1.0 / 326176.0).epsilon(1e-12));
  CHECK(cert.gamma > 0.0);
  CHECK(cert.floor_bound == doctest::Approx(5.0 * cert.gamma / 10193.0));
}

TEST_CASE("divergent solution dominates the witness classwise") {
  const auto net = fixtures::rybko_stolyar();
  const Witness w{fixtures::rs_witness()};
  const auto sol = build_divergent(net, w, std::vector<double>(4, 0.0), 1.0);
  CHECK(validate_fluid_solution(net, sol, 1e-9).ok());
  for (double x : {0.1, 0.3, 0.5, 0.8, 1.0}) {
    const auto qo = sol.q_at(x);
    const auto qw = w.sol.q_at(x);
    for (int c = 0; c < 4; ++c) CHECK(qo[c] >= qw[c] - 1e-9);
  }
}

TEST_CASE("doubling blocks double the queue") {
  const auto net = fixtures::rybko_stolyar();
  const Witness w{fixtures::rs_witness()};
  const auto sol = build_divergent(net, w, std::vector<double>(4, 0.0), 8.0);
  CHECK(validate_fluid_solution(net, sol, 1e-9).ok());
  CHECK(check_non_idling(net, sol, 1e-9).ok());
  const double w1 = total_queue(w.sol, 1.0);
  CHECK(total_queue(sol, 2.0) >= 1.0 * w1 - 1e-9);
  CHECK(total_queue(sol, 4.0) >= 2.0 * w1 - 1e-9);
  CHECK(total_queue(sol, 8.0) >= 4.0 * w1 - 1e-9);
}

TEST_CASE("linear floor certified over long horizons") {
  const auto net = fixtures::rybko_stolyar();
  const Witness w{fixtures::rs_witness()};
  const auto cert = gamma_of_witness(net, w);
  const auto sol = build_divergent(net, w, std::vector<double>(4, 0.0), 1024.0);
  CHECK(validate_fluid_solution(net, sol, 1e-9).ok());
  CHECK(check_non_idling(net, sol, 1e-9).ok());
  CHECK(verify_linear_divergence(sol, cert.gamma, 1e-9));

  const auto net1 = overloaded_single();
  const auto w1 = linear_growth_witness();
  const auto cert1 = gamma_of_witness(net1, w1);
  const auto sol1 = build_divergent(net1, w1, {0.0}, 1024.0);
  CHECK(validate_fluid_solution(net1, sol1, 1e-9).ok());
  CHECK(check_non_idling(net1, sol1, 1e-9).ok());
  CHECK(verify_linear_divergence(sol1, cert1.gamma, 1e-9));
}

TEST_CASE("state-dependent floor from a loaded start") {
  const auto net = fixtures::rybko_stolyar();
  const Witness w{fixtures::rs_witness()};
  const std::vector<double> q0 = {4.0, 2.0, 3.0, 1.0};  // norm 10
  const auto cert = gamma_of_witness(net, w, 10.0);
  const auto sol = build_divergent(net, w, q0, 64.0);
  CHECK(validate_fluid_solution(net, sol, 1e-9).ok());
  CHECK(check_non_idling(net, sol, 1e-9).ok());
  CHECK(total_queue(sol, 0.0) == doctest::Approx(10.0));
  double lo = 1e300;
  for (double x = 0.0; x <= 64.0; x += 1.0 / 16.0)
    lo = std::min(lo, total_queue(sol, x));
  CHECK(lo >= cert.floor_bound - 1e-9);
}

TEST_CASE("divergence verifier accepts and rejects correctly") {
  FluidSolution zero;
  zero.append_point(0.0, {0.0}, {0.0});
  zero.append_point(5.0, {0.0}, {2.5});
  CHECK(verify_linear_divergence(zero, 0.0, 1e-9));

  const auto net = fixtures::single_queue();
  const auto drain = simulate_priority_fluid(net, {{0}}, {4.0}, 50.0);
  CHECK(!verify_linear_divergence(drain, 0.1, 1e-9));
}
