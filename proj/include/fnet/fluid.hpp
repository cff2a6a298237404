#pragma once

#include <string>
#include <vector>

#include "fnet/network.hpp"

namespace fnet {

// Piecewise-linear fluid trajectory. Rows of q/t align with the breakpoint
// times; values between breakpoints are linear interpolations. Arrivals are
// implied as lambda_i * t and departures as mu_ij * T_ij(t).
struct FluidSolution {
  std::vector<double> times;
  std::vector<std::vector<double>> q;  // queue level per class
  std::vector<std::vector<double>> t;  // cumulative allocation per class

  int dim() const { return times.empty() ? 0 : static_cast<int>(q.front().size()); }
  size_t points() const { return times.size(); }
  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }
  bool contains(double x) const { return x >= t_begin() - 1e-12 && x <= t_end() + 1e-12; }

  // Index of the segment [times[k], times[k+1]] containing x.
  size_t segment_at(double x) const;
  std::vector<double> q_at(double x) const;
  std::vector<double> t_at(double x) const;

  // Inserts a breakpoint at x by interpolation (no-op when one exists within
  // the dedup tolerance 1e-12).
  void insert_breakpoint(double x);
  void append_point(double time, std::vector<double> qrow, std::vector<double> trow);
};

double total_queue(const FluidSolution& sol, double x);
double station_queue(const NetworkSpec& net, const FluidSolution& sol, int station,
                     double x);
// Cumulative busy time of one station at x.
double station_allocation(const NetworkSpec& net, const FluidSolution& sol, int station,
                          double x);

struct FluidViolation {
  std::string kind;
  int segment = -1;
  int index = -1;  // class or station, -1 when not applicable
  double magnitude = 0.0;
};

struct FluidReport {
  std::vector<FluidViolation> violations;
  double max_violation = 0.0;
  bool ok() const { return violations.empty(); }
  void add(const std::string& kind, int segment, int index, double magnitude);
  std::string summary() const;
};

// Checks nonnegativity, monotone allocations, T(0) = 0, per-segment station
// feasibility and flow conservation, all at additive tolerance tol.
// Throws std::invalid_argument on a structural/dimension mismatch.
FluidReport validate_fluid_solution(const NetworkSpec& net, const FluidSolution& sol,
                                    double tol);

// Work conservation: a station whose allocation slope falls below 1 - tol on a
// segment must have (near-)zero aggregate queue at both segment endpoints.
FluidReport check_non_idling(const NetworkSpec& net, const FluidSolution& sol,
                             double tol);

// (Q, T) -> (beta Q(t/beta), beta T(t/beta)) on [0, beta * horizon].
FluidSolution scale_solution(const FluidSolution& sol, double beta);

// Replaces the trajectory on [t1, t2] by the straight line between its
// endpoint values; unchanged outside.
FluidSolution linearize_segment(const FluidSolution& sol, double t1, double t2);

// Restriction to [t1, t2] (breakpoints inserted at the ends as needed).
FluidSolution restrict_solution(const FluidSolution& sol, double t1, double t2);
// Shifts the time axis so the domain starts at 0 and rebases T to T(start) = 0.
FluidSolution shift_to_zero(const FluidSolution& sol);

struct PriorityFluidOptions {
  int event_cap = 20000;
  bool* truncated = nullptr;  // set when the cap was hit (partial solution)
};

// Piecewise-linear integration of the fluid dynamics under a static-priority
// allocation rule: each station grants capacity to its classes in priority
// order; a class with an empty buffer is served at most at its instantaneous
// inflow rate. Breakpoints at every buffer-empty / regime change event.
FluidSolution simulate_priority_fluid(const NetworkSpec& net,
                                      const std::vector<std::vector<int>>& priority,
                                      const std::vector<double>& q0, double horizon,
                                      const PriorityFluidOptions& opt = {});

std::string fluid_to_json(const NetworkSpec& net, const FluidSolution& sol);
FluidSolution fluid_from_json(const std::string& text);
FluidSolution load_fluid_file(const std::string& path);

}  // namespace fnet
