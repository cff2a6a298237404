#pragma once

#include "fnet/fluid.hpp"
#include "fnet/network.hpp"

namespace fnet::fixtures {

// Single-class M/M/1-style network: one station, route [0], lambda = 1
// (exponential), mu = 2 (exponential).
NetworkSpec single_queue();
// Same topology with deterministic interarrival 1.0 and service 0.5.
NetworkSpec single_queue_deterministic();

// Two-station crossover network (Rybko-Stolyar type): type 1 routes A -> B,
// type 2 routes B -> A; lambda = 1 for both, first-stage mu = 6, exit mu = 3/2,
// all exponential. Class order: (1,1)@A, (1,2)@B, (2,1)@B, (2,2)@A.
NetworkSpec rybko_stolyar();

// The destabilizing static priority for the crossover network: each station
// prefers its exit class ((2,2) over (1,1) at A, (1,2) over (2,1) at B).
std::vector<std::vector<int>> rs_exit_priority();

// Non-idling fluid solution of the crossover network on [0,1] with Q(0) = 0
// and ||Q(1)|| = 1/2. Built as a self-similar cascade of mass-doubling
// half-cycles accumulating at t = 0 (from state (m,0,0,0): phase one of
// duration m/5 at allocation rates (1,1,0,0), phase two of duration 1.8 m at
// rates (1/6,1,0,0), reaching (0,0,2m,0); then the type-swapped half-cycle).
// The cascade is truncated at mass 2^-54 with a linear startup segment whose
// station aggregates stay below the 1e-9 check tolerance (with headroom for
// rescaling by up to 2^10), so the solution passes both fluid verifiers.
// ||Q(t)|| = t/2 on the whole domain.
FluidSolution rs_witness();

// Empirical constants for the crossover attack fixture, frozen from a
// pre-registered calibration run (master seed base 424242, 100 seeds).
struct RsAttackCalibration {
  double epoch1_doubling_fraction_min = 0.60;
  double divergence_p5_min = 1e-3;
  std::uint64_t seed_base = 424242;
  int seeds = 100;
};
RsAttackCalibration rs_attack_calibration();

}  // namespace fnet::fixtures
