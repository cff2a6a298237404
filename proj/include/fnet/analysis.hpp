#pragma once

#include <vector>

#include "fnet/sim.hpp"
#include "fnet/tracker.hpp"

namespace fnet {

// Ensemble verdicts on rate stability: a network run is rate-stable evidence
// when every type's long-run departure rate matches its arrival rate within
// tolerance. Sublinear-growth evidence (queues small relative to the horizon)
// is tracked separately, and the divergence estimate's ensemble 5th percentile
// summarizes the opposite regime.
struct StabilityReport {
  struct PerType {
    double lambda = 0.0;
    double throughput = 0.0;  // ensemble mean of D_last / T
    double gap = 0.0;         // |throughput - lambda|
  };
  std::vector<PerType> types;
  std::vector<double> q_over_t;  // ensemble mean of Q(T)/T per class
  double tol = 0.0;
  bool rate_stable_evidence = false;
  bool sublinear_evidence = false;
  double divergence_p5 = 0.0;
};

// Requires a nonempty ensemble over a shared horizon. tol <= 0 selects the
// CLT-scale default 3 / sqrt(lambda_min * T).
StabilityReport rate_stability_estimate(const NetworkSpec& net,
                                        const std::vector<SimTrace>& traces,
                                        double tol = 0.0);

// Finite-horizon proxy for the divergence rate: minimum of ||Q(t)|| / t over
// the trailing window of sample times. Scale-invariant: a trace growing
// exactly linearly returns its slope regardless of the time units.
double divergence_estimate(const SimTrace& trace, double window_fraction = 0.5);

// Ensemble closeness to the planned fluid trajectory at each grid time, using
// the bound delta * c_big^(r+3) * n with r the index of the decomposition
// segment containing the grid time.
struct ClosenessRow {
  double time = 0.0;
  int segment = 0;
  double bound = 0.0;     // +infinity when the power overflows
  double fraction = 0.0;  // ensemble fraction within the bound at this time
};
std::vector<ClosenessRow> closeness_report(const NetworkSpec& net,
                                           const std::vector<SimTrace>& traces,
                                           const AllocationPlan& plan);

// Fraction of traces within the bound at every grid time simultaneously.
double closeness_all_within(const NetworkSpec& net, const std::vector<SimTrace>& traces,
                            const AllocationPlan& plan);

}  // namespace fnet
