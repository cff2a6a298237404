#include "fnet/fdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace fnet {

namespace {

constexpr double kZero = 1e-9;  // aggregate at or below this counts as zero
// Crossings are located slightly inside the zero tolerance so run endpoints
// interpolate strictly below it.
constexpr double kCross = 0.999e-9;
constexpr double kSnap = 1e-9;  // zero runs shorter than this snap to points
// Hysteresis: a run only ends once the aggregate clears this level, so
// sub-tolerance oscillations around kCross stay inside a single run.
constexpr double kExit = 1e-8;

struct Run {
  double u = 0.0, v = 0.0;  // v == u for a touch point
  int station = -1;
  bool wide() const { return v > u; }
};

std::vector<double> station_aggregate(const NetworkSpec& net, const FluidSolution& sol,
                                      int station) {
  std::vector<double> g(sol.points(), 0.0);
  for (size_t k = 0; k < sol.points(); ++k)
    for (int c : net.station_classes[station]) g[k] += sol.q[k][c];
  return g;
}

// Maximal intervals where the piecewise-linear aggregate stays at or below
// kZero. Run membership is tested at kZero while endpoint crossings are
// solved at the strictly smaller kCross, so the aggregate value stored at a
// cut sits below the membership threshold by a margin far larger than its
// rounding error; re-detecting on the linearized output then reproduces the
// same runs instead of flickering on a knife-edge comparison. The aggregate
// is linear on each segment, so crossings are roots of a linear function.
std::vector<Run> zero_runs(const FluidSolution& sol, const std::vector<double>& g,
                           int station) {
  std::vector<Run> runs;
  const double t_begin = sol.times.front(), t_end = sol.times.back();
  bool in = g.front() <= kZero;
  bool pending = false;   // left kZero but has not cleared kExit yet
  double start = t_begin;
  double cand = start;    // candidate run end while pending
  auto close = [&](double end) {
    Run r;
    r.station = station;
    // Sub-kSnap runs in the interior collapse to touch points; at the domain
    // boundary even a very short run is a real boundary phase.
    if (end - start < kSnap && start > t_begin && end < t_end) {
      r.u = r.v = 0.5 * (start + end);
    } else {
      r.u = start;
      r.v = end;
    }
    runs.push_back(r);
  };
  for (size_t k = 0; k + 1 < sol.points(); ++k) {
    const double a = g[k], b = g[k + 1];
    const double du = sol.times[k + 1] - sol.times[k];
    if (du <= 0) continue;
    if (in) {
      if (b > kZero) {
        cand = a <= kCross ? sol.times[k] + du * (kCross - a) / (b - a)
                           : sol.times[k];
        in = false;
        pending = true;
      }
    } else if (pending) {
      if (b <= kZero) {
        in = true;  // dipped back below tolerance: the run continues
        pending = false;
      }
    } else {
      if (b <= kZero) {
        start = b <= kCross ? sol.times[k] + du * (kCross - a) / (b - a)
                            : sol.times[k + 1];
        in = true;
      }
    }
    if (pending && b > kExit) {
      close(cand);
      pending = false;
    }
  }
  if (in)
    close(t_end);
  else if (pending)
    close(cand);
  return runs;
}

double min_total(const FluidSolution& sol) {
  double lo = 1e300;
  for (const auto& row : sol.q) {
    double s = 0.0;
    for (double v : row) s += v;
    lo = std::min(lo, s);
  }
  return lo;
}

std::vector<Run> all_runs(const NetworkSpec& net, const FluidSolution& sol) {
  if (net.stations != 2)
    throw std::invalid_argument(
        "segment decomposition requires a two-station network");
  if (sol.points() < 2)
    throw std::invalid_argument("decomposition input: too few breakpoints");
  if (min_total(sol) <= kZero)
    throw std::invalid_argument(
        "decomposition input: total queue vanishes on the domain");

  std::vector<Run> runs;
  for (int s = 0; s < 2; ++s) {
    const auto g = station_aggregate(net, sol, s);
    auto rs = zero_runs(sol, g, s);
    runs.insert(runs.end(), rs.begin(), rs.end());
  }
  std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.u < b.u; });
  for (size_t i = 0; i + 1 < runs.size(); ++i)
    if (runs[i].station != runs[i + 1].station && runs[i + 1].u <= runs[i].v)
      throw std::invalid_argument(
          "degenerate input: both stations' queues vanish simultaneously");
  return runs;
}

}  // namespace

PhaseSequence detect_phase_sequence(const NetworkSpec& net, const FluidSolution& sol) {
  const auto runs = all_runs(net, sol);
  std::vector<double> cuts = {sol.t_begin(), sol.t_end()};
  for (const auto& r : runs) {
    cuts.push_back(r.u);
    if (r.wide()) cuts.push_back(r.v);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a <= 1e-12; }),
             cuts.end());
  // Clamp into the domain (a snapped endpoint run's midpoint stays inside).
  cuts.front() = sol.t_begin();
  cuts.back() = sol.t_end();

  PhaseSequence seq;
  seq.times = cuts;
  for (size_t m = 0; m + 1 < cuts.size(); ++m) {
    const double mid = 0.5 * (cuts[m] + cuts[m + 1]);
    std::vector<Phase> lab(2, Phase::positive);
    for (const auto& r : runs)
      if (r.wide() && mid >= r.u && mid <= r.v) lab[r.station] = Phase::zero;
    seq.labels.push_back(std::move(lab));
  }
  return seq;
}

Decomposition fdp_decompose(const NetworkSpec& net, const FluidSolution& sol) {
  const auto runs = all_runs(net, sol);
  Decomposition dec;
  dec.modified = sol;
  for (const auto& r : runs)
    if (r.wide()) dec.modified = linearize_segment(dec.modified, r.u, r.v);
  auto seq = detect_phase_sequence(net, sol);
  dec.cut_times = std::move(seq.times);
  dec.phase_labels = std::move(seq.labels);
  return dec;
}

ValidationReport fdp_bound_check(const NetworkSpec& net, const FluidSolution& sol,
                                 const Decomposition& dec) {
  ValidationReport rep;
  auto add = [&rep](const std::string& m) { rep.violations.push_back(m); };
  const auto cons = derived_constants(net);
  const double inf_in = min_total(sol);
  const double inf_mod = min_total(dec.modified);
  const double theta = sol.t_end() - sol.t_begin();
  const size_t M = dec.cut_times.size() - 1;

  if (static_cast<double>(M) > 2.0 * cons.c_big * theta / inf_in + 2.0 + 1e-9)
    add("segment count exceeds 2 c_big theta sup(1/||Q||) + 2");
  if (inf_mod < inf_in - 1e-9)
    add("modified solution dips below the input's minimum total queue");

  // Agreement at cut times (values are copied by linearization, not recomputed).
  for (double tc : dec.cut_times) {
    const auto a = sol.q_at(tc);
    const auto b = dec.modified.q_at(tc);
    for (size_t c = 0; c < a.size(); ++c)
      if (a[c] != b[c]) {
        add("modified solution disagrees with the input at a cut time");
        break;
      }
  }

  // Per-interval sign constancy of the modified station aggregates, sampled at
  // interval midpoints and at the modified solution's interior breakpoints.
  for (size_t m = 0; m + 1 < dec.cut_times.size(); ++m) {
    if (m >= dec.phase_labels.size()) {
      add("missing phase label for an interval");
      break;
    }
    const double lo = dec.cut_times[m], hi = dec.cut_times[m + 1];
    // The aggregate is piecewise linear, so its interior extrema sit at
    // breakpoints; midpoints between consecutive grid points guard against a
    // label that only matches at the breakpoints themselves.
    std::vector<double> grid = {lo, hi};
    for (double t : dec.modified.times)
      if (t > lo + 1e-12 && t < hi - 1e-12) grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    std::vector<double> samples;
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
      if (i > 0) samples.push_back(grid[i]);
      samples.push_back(0.5 * (grid[i] + grid[i + 1]));
    }
    for (int s = 0; s < net.stations; ++s) {
      for (double t : samples) {
        const double g = station_queue(net, dec.modified, s, t);
        const bool zero = dec.phase_labels[m][s] == Phase::zero;
        if (zero && g > kExit + 1e-12) {
          add("interval labeled zero has positive station queue");
          break;
        }
        if (!zero && g <= kCross) {
          add("interval labeled positive touches the station boundary");
          break;
        }
      }
    }
  }

  // Spacing of consecutive boundary phases on opposite stations.
  std::vector<std::pair<double, int>> starts;
  for (size_t m = 0; m + 1 < dec.cut_times.size(); ++m)
    for (int s = 0; s < 2 && m < dec.phase_labels.size(); ++s)
      if (dec.phase_labels[m][s] == Phase::zero &&
          (m == 0 || dec.phase_labels[m - 1][s] != Phase::zero))
        starts.push_back({dec.cut_times[m], s});
  std::sort(starts.begin(), starts.end());
  for (size_t i = 0; i + 1 < starts.size(); ++i)
    if (starts[i].second != starts[i + 1].second &&
        starts[i + 1].first - starts[i].first < inf_in / cons.c_big - 1e-9)
      add("opposite-station boundary phases start closer than inf||Q||/c_big");

  return rep;
}

std::string decomposition_to_json(const NetworkSpec& net, const Decomposition& dec) {
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& lab : dec.phase_labels) {
    nlohmann::json row = nlohmann::json::array();
    for (Phase p : lab) row.push_back(p == Phase::zero ? "zero" : "positive");
    labels.push_back(row);
  }
  return nlohmann::json{{"cut_times", dec.cut_times},
                        {"phase_labels", labels},
                        {"modified", nlohmann::json::parse(fluid_to_json(net, dec.modified))}}
      .dump();
}

}  // namespace fnet
