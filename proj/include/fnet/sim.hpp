#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "fnet/network.hpp"
#include "fnet/rng.hpp"

namespace fnet {

// State of the stochastic network: integer queue lengths per class, residual
// interarrival time per type, and the residual service time of the class's
// head-of-line job (meaningful only while in_service is set; a preempted job
// keeps its residual and resumes with it).
struct SimState {
  std::vector<long long> q;       // per class
  std::vector<double> z1;         // per type; negative = draw fresh at start
  std::vector<double> z2;         // per class
  std::vector<bool> in_service;   // per class

  static SimState empty(const NetworkSpec& net);
};

// Per-class head-of-line job timestamps a policy may select on. Entries are
// +infinity when the class queue is empty.
struct PolicyContext {
  const NetworkSpec& net;
  const SimState& state;
  const std::vector<double>& head_station_arrival;  // per class
  const std::vector<double>& head_network_entry;    // per class
  double clock;
};

// Head-of-line preemptive-resume scheduling policy: at each decision point the
// simulator asks every station which class to work on until the next event.
// A policy must be non-idling: returning -1 (idle) with station work present
// aborts the run.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int choose(const PolicyContext& ctx, int station) = 0;
  // Earliest future time at which the policy wants a decision point even if
  // no arrival or completion occurs (e.g. an allocation budget expiring).
  virtual double next_wakeup(double /*clock*/) const {
    return std::numeric_limits<double>::infinity();
  }
  // Service time spent on a class since the last decision point.
  virtual void note_service(int /*cls*/, double /*dt*/) {}
};

struct SimEvent {
  double time = 0.0;
  char kind = 'a';  // 'a' arrival (index = type), 'd' departure (index = class)
  int index = 0;
};

// Sampled trajectory plus cumulative counting processes. At every sample time
// the conservation identities hold exactly in integer arithmetic:
//   q[first stage]   = q0 + A_type - D_class
//   q[later stages]  = q0 + D_prev - D_class
// window_min_station records the minimum station aggregate attained anywhere
// inside each inter-sample window, which makes the work-conservation check
// exact: a station whose aggregate never hit zero must have been busy for the
// whole window.
struct SimTrace {
  std::uint64_t seed = 0;
  std::vector<long long> q0;                        // per class
  std::vector<double> sample_times;
  std::vector<std::vector<long long>> q_samples;    // [sample][class]
  std::vector<std::vector<long long>> a_samples;    // [sample][type]
  std::vector<std::vector<long long>> d_samples;    // [sample][class]
  std::vector<std::vector<double>> t_samples;       // [sample][class] busy time
  std::vector<std::vector<long long>> window_min_station;  // [window][station]
  std::vector<SimEvent> events;                     // populated when logging is on
  long long event_count = 0;
};

struct SimOptions {
  double sample_dt = 0.0;         // 0: samples only at start and horizon
  long long event_cap = 100000000;
  bool log_events = false;
  std::size_t event_log_cap = 1000000;
  SimState* final_state = nullptr;  // filled with the state at the horizon
};

// Event-driven execution until the horizon. Deterministic given (net, policy,
// state0, horizon, seed): every primitive sequence draws from its own stream
// derived from the master seed by a fixed label. Service times are drawn
// lazily when a head-of-line job first enters service. Simultaneous events
// process arrivals before completions, lowest index first. Throws
// std::runtime_error on an idling policy, an invalid class choice, or an
// exceeded event budget.
SimTrace simulate(const NetworkSpec& net, Policy& policy, const SimState& state0,
                  double horizon, std::uint64_t seed, const SimOptions& opt = {});

// Builtin policies. fifo/lifo/gfifo select among head-of-line jobs by station
// arrival time (earliest / latest) or network entry time; static_priority
// serves the first nonempty class in the given per-station order (which must
// cover every class of its station).
std::unique_ptr<Policy> fifo_policy();
std::unique_ptr<Policy> lifo_policy();
std::unique_ptr<Policy> gfifo_policy();
std::unique_ptr<Policy> static_priority_policy(const NetworkSpec& net,
                                               std::vector<std::vector<int>> order);
// kind in {fifo, lifo, gfifo, priority}; "priority" uses ascending class index.
std::unique_ptr<Policy> builtin_policy(const std::string& kind, const NetworkSpec& net);

// Replays the conservation identities, per-station busy-time feasibility
// (station busy time within a window never exceeds the window length), busy
// time monotonicity, queue nonnegativity, and work conservation on every
// window whose station aggregate stayed positive.
ValidationReport verify_trace(const NetworkSpec& net, const SimTrace& trace);

// Columns: time, q_0.., A_0.., D_0.., T_0..; one row per sample. Doubles are
// printed with full precision so identical runs serialize byte for byte.
std::string trace_to_csv(const NetworkSpec& net, const SimTrace& trace);
std::string events_to_jsonl(const SimTrace& trace);

}  // namespace fnet
