#pragma once

#include "fnet/fluid.hpp"
#include "fnet/network.hpp"

namespace fnet {

// A certified escape trajectory: non-idling fluid solution on [0,1] with
// Q(0) = 0 and ||Q(t)|| > 0 for every t in (0,1].
struct Witness {
  FluidSolution sol;
};

// Constants certifying linear divergence of the solutions grown from a
// witness. gamma is the slope of the linear floor ||Q(t)|| >= gamma t;
// floor_bound is the state-dependent floor (||q||/2) min(gamma/c_big, 1).
struct DivergenceCertificate {
  double gamma1 = 0.0;
  double gamma0 = 0.0;
  double gamma = 0.0;
  double floor_bound = 0.0;
};

// Validates the witness invariants (both fluid checks, zero start, positive
// norm at interior breakpoints and midpoints). Throws std::invalid_argument
// with a reason when they fail.
void check_witness(const NetworkSpec& net, const Witness& w, double tol = 1e-9);

// Trims a raw solution to its last escape-from-zero window and rescales that
// window onto [0,1]. Throws when raw is invalid or never leaves zero.
Witness normalize_witness(const NetworkSpec& net, const FluidSolution& raw);

// gamma1 = min ||Q(t)|| over [ ||Q(1)|| / (4 c_big), 1 ], computed exactly on
// the linear pieces; gamma0 = min(||Q(1)||/4, gamma1) (or ||Q(1)||/4 outright
// when ||Q(1)|| >= 4 c_big); gamma = gamma0 / 2. qnorm sets floor_bound.
DivergenceCertificate gamma_of_witness(const NetworkSpec& net, const Witness& w,
                                       double qnorm = 0.0);

// Grows a non-idling fluid solution from initial state q on [0, horizon] by
// replaying the witness at doubling scales on the blocks [0,1], [1,2], [2,4],
// ..., carrying prior mass forward as a zero-inflow overlay served with the
// leftover station capacity in class-index order. The result dominates the
// scaled witness classwise on every block, so ||Q(2^(n+1))|| >= 2^n ||Q_w(1)||.
FluidSolution build_divergent(const NetworkSpec& net, const Witness& w,
                              const std::vector<double>& q, double horizon);

// True iff ||Q(t)|| >= gamma t - tol at every breakpoint and segment midpoint.
bool verify_linear_divergence(const FluidSolution& sol, double gamma, double tol);

}  // namespace fnet
