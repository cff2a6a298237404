#include "fnet/fixtures.hpp"

#include <cmath>

namespace fnet::fixtures {

NetworkSpec single_queue() {
  NetworkSpec net;
  net.stations = 1;
  TypeSpec t;
  t.route = {0};
  t.lambda = 1.0;
  t.arrival = DistSpec::exponential(1.0);
  t.stages = {{2.0, DistSpec::exponential(2.0)}};
  net.types = {t};
  net.finalize();
  return net;
}

NetworkSpec single_queue_deterministic() {
  NetworkSpec net;
  net.stations = 1;
  TypeSpec t;
  t.route = {0};
  t.lambda = 1.0;
  t.arrival = DistSpec::deterministic(1.0);
  t.stages = {{2.0, DistSpec::deterministic(0.5)}};
  net.types = {t};
  net.finalize();
  return net;
}

NetworkSpec rybko_stolyar() {
  NetworkSpec net;
  net.stations = 2;
  TypeSpec t1;
  t1.route = {0, 1};
  t1.lambda = 1.0;
  t1.arrival = DistSpec::exponential(1.0);
  t1.stages = {{6.0, DistSpec::exponential(6.0)}, {1.5, DistSpec::exponential(1.5)}};
  TypeSpec t2;
  t2.route = {1, 0};
  t2.lambda = 1.0;
  t2.arrival = DistSpec::exponential(1.0);
  t2.stages = {{6.0, DistSpec::exponential(6.0)}, {1.5, DistSpec::exponential(1.5)}};
  net.types = {t1, t2};
  net.finalize();
  return net;
}

std::vector<std::vector<int>> rs_exit_priority() {
  // Classes: 0 = (1,1)@A, 1 = (1,2)@B, 2 = (2,1)@B, 3 = (2,2)@A.
  return {{3, 0}, {1, 2}};
}

namespace {

// Extends sol by one constant-rate segment of length dt ending at absolute
// time t_end (tracked by the caller so that breakpoint merging of the very
// short early segments cannot drift the clock); queue slopes follow the flow
// balance equations for allocation fractions rho.
void advance(const NetworkSpec& net, FluidSolution& sol, double t_end, double dt,
             const std::vector<double>& rho) {
  const int d = net.class_count;
  auto q = sol.q.back();
  auto T = sol.t.back();
  for (int c = 0; c < d; ++c) {
    const double inflow = net.class_stage[c] == 0
                              ? net.types[net.class_type[c]].lambda
                              : net.mu(c - 1) * rho[c - 1];
    q[c] = std::max(0.0, q[c] + (inflow - net.mu(c) * rho[c]) * dt);
    T[c] += rho[c] * dt;
  }
  sol.append_point(t_end, std::move(q), std::move(T));
}

}  // namespace

FluidSolution rs_witness() {
  const NetworkSpec net = rybko_stolyar();
  // Half-cycle count. The starting mass 2^-(K+1) must stay below the 1e-9
  // check tolerance even after the witness is rescaled by factors up to 2^10
  // in the divergence construction, hence the deep truncation.
  const int K = 53;
  const double m0 = std::ldexp(1.0, -(K + 1));

  FluidSolution sol;
  sol.append_point(0.0, std::vector<double>(4, 0.0), std::vector<double>(4, 0.0));

  // Startup: grow buffer (1,1) from 0 to m0 over [0, 2 m0]; every other buffer
  // held at zero by serving exactly at its inflow rate.
  double clock = 2.0 * m0;
  advance(net, sol, clock, 2.0 * m0, {1.0 / 12.0, 1.0 / 3.0, 1.0 / 6.0, 2.0 / 3.0});

  double m = m0;
  for (int k = 0; k < K; ++k) {
    if (k % 2 == 0) {
      // Mass m in buffer (1,1) at station A.
      advance(net, sol, clock += m / 5.0, m / 5.0, {1.0, 1.0, 0.0, 0.0});
      advance(net, sol, clock += 1.8 * m, 1.8 * m, {1.0 / 6.0, 1.0, 0.0, 0.0});
    } else {
      // Mass m in buffer (2,1) at station B (type-swapped half-cycle).
      advance(net, sol, clock += m / 5.0, m / 5.0, {0.0, 0.0, 1.0, 1.0});
      advance(net, sol, clock += 1.8 * m, 1.8 * m, {0.0, 0.0, 1.0 / 6.0, 1.0});
    }
    m *= 2.0;
  }
  // The earliest cascade segments are shorter than the breakpoint merge
  // tolerance and collapse into the origin row, leaving sub-tolerance mass
  // there; pin the origin to an exact zero state.
  sol.q.front().assign(4, 0.0);
  sol.t.front().assign(4, 0.0);
  sol.times.front() = 0.0;
  // Land the final breakpoint exactly at t = 1.
  sol.times.back() = 1.0;
  return sol;
}

RsAttackCalibration rs_attack_calibration() { return {}; }

}  // namespace fnet::fixtures
