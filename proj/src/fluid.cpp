#include "fnet/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace fnet {

namespace {
constexpr double kMergeTol = 1e-12;  // breakpoints closer than this are merged

std::vector<double> lerp(const std::vector<double>& a, const std::vector<double>& b,
                         double w) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + w * (b[i] - a[i]);
  return out;
}
}  // namespace

size_t FluidSolution::segment_at(double x) const {
  if (times.size() < 2) return 0;
  auto it = std::upper_bound(times.begin(), times.end(), x);
  size_t k = static_cast<size_t>(it - times.begin());
  if (k == 0) return 0;
  if (k >= times.size()) return times.size() - 2;
  return k - 1;
}

std::vector<double> FluidSolution::q_at(double x) const {
  const size_t k = segment_at(x);
  if (times.size() < 2) return q.front();
  const double dt = times[k + 1] - times[k];
  const double w = dt > 0 ? std::clamp((x - times[k]) / dt, 0.0, 1.0) : 0.0;
  return lerp(q[k], q[k + 1], w);
}

std::vector<double> FluidSolution::t_at(double x) const {
  const size_t k = segment_at(x);
  if (times.size() < 2) return t.front();
  const double dt = times[k + 1] - times[k];
  const double w = dt > 0 ? std::clamp((x - times[k]) / dt, 0.0, 1.0) : 0.0;
  return lerp(t[k], t[k + 1], w);
}

void FluidSolution::insert_breakpoint(double x) {
  for (double u : times)
    if (std::abs(u - x) <= kMergeTol) return;
  if (x < t_begin() || x > t_end()) return;
  const size_t k = segment_at(x);
  auto qr = q_at(x);
  auto tr = t_at(x);
  times.insert(times.begin() + k + 1, x);
  q.insert(q.begin() + k + 1, std::move(qr));
  t.insert(t.begin() + k + 1, std::move(tr));
}

void FluidSolution::append_point(double time, std::vector<double> qrow,
                                 std::vector<double> trow) {
  if (!times.empty() && time - times.back() <= kMergeTol) {
    q.back() = std::move(qrow);
    t.back() = std::move(trow);
    return;
  }
  times.push_back(time);
  q.push_back(std::move(qrow));
  t.push_back(std::move(trow));
}

double total_queue(const FluidSolution& sol, double x) {
  if (!sol.contains(x)) throw std::invalid_argument("time outside solution domain");
  auto row = sol.q_at(x);
  double s = 0.0;
  for (double v : row) s += v;
  return s;
}

double station_queue(const NetworkSpec& net, const FluidSolution& sol, int station,
                     double x) {
  if (!sol.contains(x)) throw std::invalid_argument("time outside solution domain");
  auto row = sol.q_at(x);
  double s = 0.0;
  for (int c : net.station_classes[station]) s += row[c];
  return s;
}

double station_allocation(const NetworkSpec& net, const FluidSolution& sol, int station,
                          double x) {
  auto row = sol.t_at(x);
  double s = 0.0;
  for (int c : net.station_classes[station]) s += row[c];
  return s;
}

void FluidReport::add(const std::string& kind, int segment, int index,
                      double magnitude) {
  violations.push_back({kind, segment, index, magnitude});
  max_violation = std::max(max_violation, magnitude);
}

std::string FluidReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream os;
  os << violations.size() << " violation(s); worst " << max_violation;
  for (size_t i = 0; i < violations.size() && i < 5; ++i) {
    const auto& v = violations[i];
    os << "\n  " << v.kind << " at segment " << v.segment << " index " << v.index
       << " magnitude " << v.magnitude;
  }
  return os.str();
}

FluidReport validate_fluid_solution(const NetworkSpec& net, const FluidSolution& sol,
                                    double tol) {
  if (sol.times.size() < 1 || sol.q.size() != sol.times.size() ||
      sol.t.size() != sol.times.size())
    throw std::invalid_argument("malformed fluid solution: row/breakpoint mismatch");
  for (const auto& row : sol.q)
    if (static_cast<int>(row.size()) != net.class_count)
      throw std::invalid_argument("fluid solution dimension mismatch with network");
  for (const auto& row : sol.t)
    if (static_cast<int>(row.size()) != net.class_count)
      throw std::invalid_argument("fluid solution dimension mismatch with network");

  FluidReport rep;
  const int d = net.class_count;
  for (size_t k = 0; k + 1 < sol.times.size(); ++k)
    if (sol.times[k + 1] <= sol.times[k])
      rep.add("breakpoints not increasing", static_cast<int>(k), -1,
              sol.times[k] - sol.times[k + 1]);

  for (size_t k = 0; k < sol.times.size(); ++k)
    for (int c = 0; c < d; ++c)
      if (sol.q[k][c] < -tol)
        rep.add("negative queue", static_cast<int>(k), c, -sol.q[k][c]);

  if (std::abs(sol.times.front()) <= kMergeTol)
    for (int c = 0; c < d; ++c)
      if (std::abs(sol.t.front()[c]) > tol)
        rep.add("allocation not zero at origin", 0, c, std::abs(sol.t.front()[c]));

  for (size_t k = 0; k + 1 < sol.times.size(); ++k) {
    const double du = sol.times[k + 1] - sol.times[k];
    for (int c = 0; c < d; ++c) {
      const double dT = sol.t[k + 1][c] - sol.t[k][c];
      if (dT < -tol)
        rep.add("allocation decreasing", static_cast<int>(k), c, -dT);
      // Flow conservation across the segment.
      const int ty = net.class_type[c];
      const int st = net.class_stage[c];
      double inflow;
      if (st == 0) {
        inflow = net.types[ty].lambda * du;
      } else {
        inflow = net.mu(c - 1) * (sol.t[k + 1][c - 1] - sol.t[k][c - 1]);
      }
      const double dq = sol.q[k + 1][c] - sol.q[k][c];
      const double resid = dq - (inflow - net.mu(c) * dT);
      if (std::abs(resid) > tol)
        rep.add("flow conservation", static_cast<int>(k), c, std::abs(resid));
    }
    for (int s = 0; s < net.stations; ++s) {
      double dTs = 0.0;
      for (int c : net.station_classes[s]) dTs += sol.t[k + 1][c] - sol.t[k][c];
      if (dTs > du + tol)
        rep.add("station feasibility", static_cast<int>(k), s, dTs - du);
    }
  }
  return rep;
}

FluidReport check_non_idling(const NetworkSpec& net, const FluidSolution& sol,
                             double tol) {
  FluidReport rep;
  for (size_t k = 0; k + 1 < sol.times.size(); ++k) {
    const double du = sol.times[k + 1] - sol.times[k];
    if (du <= 0) continue;
    for (int s = 0; s < net.stations; ++s) {
      double dTs = 0.0, qa = 0.0, qb = 0.0;
      for (int c : net.station_classes[s]) {
        dTs += sol.t[k + 1][c] - sol.t[k][c];
        qa += sol.q[k][c];
        qb += sol.q[k + 1][c];
      }
      // The slope is reconstructed from stored cumulative allocations, whose
      // rounding is ulp(T) regardless of segment length; on very short
      // segments that quantization can dominate. Only flag deficits that are
      // resolvable above the representation error.
      double repr = 0.0;
      for (int c : net.station_classes[s])
        repr += std::abs(sol.t[k + 1][c]) + std::abs(sol.t[k][c]);
      const double err = 4.0 * std::numeric_limits<double>::epsilon() * repr / du;
      if (dTs / du < 1.0 - tol - err) {
        const double worst = std::max(qa, qb);
        if (worst > tol) rep.add("idling with work", static_cast<int>(k), s, worst);
      }
    }
  }
  return rep;
}

FluidSolution scale_solution(const FluidSolution& sol, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  FluidSolution out = sol;
  for (auto& x : out.times) x *= beta;
  for (auto& row : out.q)
    for (auto& v : row) v *= beta;
  for (auto& row : out.t)
    for (auto& v : row) v *= beta;
  return out;
}

FluidSolution linearize_segment(const FluidSolution& sol, double t1, double t2) {
  if (!(t1 < t2)) throw std::invalid_argument("need t1 < t2");
  if (!sol.contains(t1) || !sol.contains(t2))
    throw std::invalid_argument("linearization window outside solution domain");
  FluidSolution out = sol;
  out.insert_breakpoint(t1);
  out.insert_breakpoint(t2);
  const size_t a = out.segment_at(t1 + kMergeTol);
  size_t b = a;
  while (b + 1 < out.times.size() && out.times[b + 1] <= t2 + kMergeTol) ++b;
  // Drop interior breakpoints (a+1 .. b-1 rows), keep endpoints.
  if (b > a + 1) {
    out.times.erase(out.times.begin() + a + 1, out.times.begin() + b);
    out.q.erase(out.q.begin() + a + 1, out.q.begin() + b);
    out.t.erase(out.t.begin() + a + 1, out.t.begin() + b);
  }
  return out;
}

FluidSolution restrict_solution(const FluidSolution& sol, double t1, double t2) {
  if (!(t1 < t2)) throw std::invalid_argument("need t1 < t2");
  FluidSolution tmp = sol;
  tmp.insert_breakpoint(t1);
  tmp.insert_breakpoint(t2);
  FluidSolution out;
  for (size_t k = 0; k < tmp.times.size(); ++k) {
    if (tmp.times[k] < t1 - kMergeTol || tmp.times[k] > t2 + kMergeTol) continue;
    out.times.push_back(tmp.times[k]);
    out.q.push_back(tmp.q[k]);
    out.t.push_back(tmp.t[k]);
  }
  return out;
}

FluidSolution shift_to_zero(const FluidSolution& sol) {
  FluidSolution out = sol;
  const double t0 = out.times.front();
  const auto base = out.t.front();
  for (auto& x : out.times) x -= t0;
  for (auto& row : out.t)
    for (size_t c = 0; c < row.size(); ++c) row[c] -= base[c];
  return out;
}

namespace detail {

// Fixed-point solve for the instantaneous allocation fractions of a
// priority-driven fluid regime. capacity: available fraction per station;
// stage1_inflow: external inflow rate per class (nonzero only for first
// stages). A positive buffer takes all remaining capacity at its turn; an
// empty buffer is capped at inflow/mu so it stays empty.
std::vector<double> priority_rates(const NetworkSpec& net,
                                   const std::vector<std::vector<int>>& priority,
                                   const std::vector<double>& q,
                                   const std::vector<double>& capacity,
                                   const std::vector<double>& stage1_inflow) {
  const int d = net.class_count;
  std::vector<double> rho(d, 0.0);
  auto inflow_of = [&](int c) {
    if (net.class_stage[c] == 0) return stage1_inflow[c];
    return net.mu(c - 1) * rho[c - 1];
  };
  const int sweeps = 4 * d + 8;
  for (int it = 0; it < sweeps; ++it) {
    double delta = 0.0;
    for (int s = 0; s < net.stations; ++s) {
      double rem = capacity[s];
      for (int c : priority[s]) {
        double r;
        if (q[c] > 0.0) {
          r = rem;
        } else {
          r = std::min(rem, inflow_of(c) / net.mu(c));
        }
        delta = std::max(delta, std::abs(r - rho[c]));
        rho[c] = r;
        rem = std::max(0.0, rem - r);
      }
    }
    if (delta < 1e-14) break;
  }
  return rho;
}

}  // namespace detail

FluidSolution simulate_priority_fluid(const NetworkSpec& net,
                                      const std::vector<std::vector<int>>& priority,
                                      const std::vector<double>& q0, double horizon,
                                      const PriorityFluidOptions& opt) {
  const int d = net.class_count;
  if (static_cast<int>(q0.size()) != d)
    throw std::invalid_argument("q0 dimension mismatch");
  if (!(horizon > 0)) throw std::invalid_argument("horizon must be positive");
  if (static_cast<int>(priority.size()) != net.stations)
    throw std::invalid_argument("priority must list every station");
  for (int s = 0; s < net.stations; ++s) {
    auto sorted = priority[s];
    std::sort(sorted.begin(), sorted.end());
    if (sorted != net.station_classes[s])
      throw std::invalid_argument("priority order must cover the station's classes");
  }
  for (double v : q0)
    if (v < 0) throw std::invalid_argument("q0 must be nonnegative");

  std::vector<double> stage1_inflow(d, 0.0);
  for (int c = 0; c < d; ++c)
    if (net.class_stage[c] == 0) stage1_inflow[c] = net.types[net.class_type[c]].lambda;
  const std::vector<double> capacity(net.stations, 1.0);

  FluidSolution sol;
  std::vector<double> q = q0;
  std::vector<double> T(d, 0.0);
  double clock = 0.0;
  sol.append_point(clock, q, T);
  if (opt.truncated) *opt.truncated = false;

  for (int ev = 0; ev < opt.event_cap; ++ev) {
    auto rho = detail::priority_rates(net, priority, q, capacity, stage1_inflow);
    std::vector<double> slope(d);
    for (int c = 0; c < d; ++c) {
      const double inflow = net.class_stage[c] == 0 ? stage1_inflow[c]
                                                    : net.mu(c - 1) * rho[c - 1];
      slope[c] = inflow - net.mu(c) * rho[c];
    }
    double dt = horizon - clock;
    int trigger = -1;
    for (int c = 0; c < d; ++c) {
      if (slope[c] < -1e-13 && q[c] > 0.0) {
        const double hit = q[c] / -slope[c];
        if (hit < dt - 1e-15) {
          dt = hit;
          trigger = c;
        }
      }
    }
    if (dt <= 0) dt = 0.0;
    clock += dt;
    for (int c = 0; c < d; ++c) {
      q[c] = std::max(0.0, q[c] + slope[c] * dt);
      if (q[c] < 1e-13) q[c] = 0.0;
      T[c] += rho[c] * dt;
    }
    if (trigger >= 0) q[trigger] = 0.0;
    sol.append_point(clock, q, T);
    if (clock >= horizon - kMergeTol) return sol;
  }
  if (opt.truncated) {
    *opt.truncated = true;
    return sol;
  }
  throw std::runtime_error("priority fluid event cap exceeded");
}

namespace {
using nlohmann::json;
}

std::string fluid_to_json(const NetworkSpec& net, const FluidSolution& sol) {
  json classes = json::array();
  for (int c = 0; c < net.class_count; ++c)
    classes.push_back(json{{"type", net.class_type[c]}, {"stage", net.class_stage[c]}});
  std::vector<double> qflat, tflat;
  for (const auto& row : sol.q) qflat.insert(qflat.end(), row.begin(), row.end());
  for (const auto& row : sol.t) tflat.insert(tflat.end(), row.begin(), row.end());
  return json{{"breakpoints", sol.times},
              {"q", qflat},
              {"t", tflat},
              {"classes", classes}}
      .dump();
}

FluidSolution fluid_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("fluid JSON parse error: ") + e.what());
  }
  FluidSolution sol;
  sol.times = j.at("breakpoints").get<std::vector<double>>();
  auto qflat = j.at("q").get<std::vector<double>>();
  auto tflat = j.at("t").get<std::vector<double>>();
  const size_t n = sol.times.size();
  if (n == 0 || qflat.size() != tflat.size() || qflat.size() % n != 0)
    throw std::invalid_argument("fluid JSON: inconsistent matrix shapes");
  const size_t d = qflat.size() / n;
  sol.q.assign(n, std::vector<double>(d));
  sol.t.assign(n, std::vector<double>(d));
  for (size_t k = 0; k < n; ++k)
    for (size_t c = 0; c < d; ++c) {
      sol.q[k][c] = qflat[k * d + c];
      sol.t[k][c] = tflat[k * d + c];
    }
  return sol;
}

FluidSolution load_fluid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open fluid file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return fluid_from_json(ss.str());
}

}  // namespace fnet
