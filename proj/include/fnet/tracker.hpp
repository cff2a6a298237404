#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fnet/divergence.hpp"
#include "fnet/fdp.hpp"
#include "fnet/sim.hpp"

namespace fnet {

// Time-allocation plan for mimicking a divergent fluid solution from the
// state q: the horizon theta0 is the first time the planned solution's total
// mass reaches 3||q||, the grid spacing is delta * ||q||, and each interval
// carries the nominal busy time of every class taken from the
// segment-decomposed solution.
struct AllocationPlan {
  double n = 0.0;            // ||q|| at planning time
  double gamma = 0.0;        // divergence rate of the witness
  double theta_strict = 0.0; // max(1, 3/gamma)
  double theta = 0.0;        // applied epoch factor: theta0 / n
  double theta0 = 0.0;       // planning horizon
  double delta_strict = 0.0; // proof-grade grid constant (0 when it underflows)
  double delta_strict_log10 = 0.0;
  double delta = 0.0;        // applied grid constant
  bool delta_from_strict = false;
  int segments = 0;          // segment count of the decomposition
  double target_norm = 0.0;  // planned ||Q(theta0)||, >= 3 n
  std::vector<double> grid;  // t_0 = 0 < ... < t_K = theta0
  std::vector<double> cut_times;  // segment cuts of the decomposition
  std::vector<std::vector<double>> allocations;   // [interval][class]
  std::vector<std::vector<int>> serve_order;      // per station
  FluidSolution fluid;       // decomposition-modified divergent solution
};

// Proof-grade grid constant (1 / (12 c_big^{M+3})) min(gamma/c_big, 1),
// returned together with its base-10 logarithm since the value itself
// underflows for realistic M. practical_cap limits the grid size: the applied
// constant is the larger of the strict value and theta/practical_cap, and
// *from_strict reports whether the strict branch was binding.
double delta_default(const Constants& cons, int segments, double gamma, double theta,
                     long long practical_cap, double* log10_strict, bool* from_strict);

// Builds the plan: grows a divergent solution from q until its mass reaches
// 3||q||, applies the segment decomposition, and samples the modified
// solution's allocations on the delta*||q|| grid. delta_override > 0 forces
// the grid constant. Requires ||q|| >= 1 and a two-station network.
AllocationPlan build_allocation_plan(const NetworkSpec& net, const Witness& w,
                                     const std::vector<double>& q,
                                     double delta_override = 0.0,
                                     long long practical_cap = 10000);

// Head-of-line preemptive-resume policy executing the plan: within each grid
// interval a station serves its classes in plan order, each until the nominal
// allocation is spent or the class empties; leftover time goes to the lowest
// indexed class with work. Budgets reset at grid boundaries. After the grid
// ends the policy degenerates to lowest-index work conservation.
std::unique_ptr<Policy> tracker_policy(std::shared_ptr<const AllocationPlan> plan);

struct SupervisorConfig {
  double n0 = 50.0;           // restart mass threshold
  double growth_factor = 2.0; // per-epoch doubling target
  int max_epochs = 16;
  double delta_override = 0.0;
  long long practical_cap = 10000;
  double sample_dt = 1.0;
};

struct EpochRecord {
  double start_time = 0.0, end_time = 0.0;
  double start_norm = 0.0, end_norm = 0.0;
  double trough = 0.0;        // minimum sampled total queue within the epoch
  double theta_used = 0.0;    // (end_time - start_time) / start_norm
  double delta_used = 0.0;
  bool doubled = false;
  bool trough_ok = false;
  bool used_fallback = false; // recovery epoch under the fallback policy
};

struct EpochLog {
  double gamma = 0.0;
  double theta_strict = 0.0;
  std::vector<EpochRecord> epochs;
};

// Epoch loop: plan from the current state, run the tracker for theta0 time,
// then check the doubling and trough conditions. On success, re-plan from the
// grown state; on failure, run the fallback (static priority by class index)
// until the mass recovers to n0, then try again. Returns the stitched trace
// over all epochs; the log records every epoch outcome.
SimTrace supervisor_run(const NetworkSpec& net, const Witness& w, const SimState& state0,
                        const SupervisorConfig& cfg, double horizon, std::uint64_t seed,
                        EpochLog* log);

// Exact arithmetic consequence of the doubling recursion: on every prefix of
// successful non-fallback epochs, end mass / end time >= 1 / (largest epoch
// factor used so far), up to 1e-9.
bool epoch_induction_holds(const EpochLog& log);

}  // namespace fnet
