#include "fnet/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fnet {

namespace detail {
// Defined in fluid.cpp.
std::vector<double> priority_rates(const NetworkSpec& net,
                                   const std::vector<std::vector<int>>& priority,
                                   const std::vector<double>& q,
                                   const std::vector<double>& capacity,
                                   const std::vector<double>& stage1_inflow);
}  // namespace detail

namespace {

constexpr double kTol = 1e-9;

double norm1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

void check_witness(const NetworkSpec& net, const Witness& w, double tol) {
  const auto& sol = w.sol;
  if (sol.points() < 2) throw std::invalid_argument("witness: too few breakpoints");
  if (std::abs(sol.t_begin()) > 1e-12 || std::abs(sol.t_end() - 1.0) > 1e-12)
    throw std::invalid_argument("witness: domain must be [0,1]");
  if (norm1(sol.q.front()) > tol)
    throw std::invalid_argument("witness: must start from the zero state");
  if (norm1(sol.q.back()) <= tol)
    throw std::invalid_argument("witness: must end with positive total queue");
  auto rep = validate_fluid_solution(net, sol, tol);
  if (!rep.ok())
    throw std::invalid_argument("witness: fluid checks failed: " + rep.summary());
  rep = check_non_idling(net, sol, tol);
  if (!rep.ok())
    throw std::invalid_argument("witness: idles with work present: " + rep.summary());
  // Positive norm on (0,1]: linear pieces attain their minima at breakpoints,
  // but check midpoints too so the test is independent of refinement.
  for (size_t k = 1; k < sol.points(); ++k) {
    if (norm1(sol.q[k]) <= 0.0)
      throw std::invalid_argument("witness: total queue returns to zero after leaving");
    const double mid = 0.5 * (sol.times[k - 1] + sol.times[k]);
    if (mid > 0.0 && total_queue(sol, mid) <= 0.0)
      throw std::invalid_argument("witness: total queue returns to zero after leaving");
  }
}

Witness normalize_witness(const NetworkSpec& net, const FluidSolution& raw) {
  // Already normalized: fixed point.
  try {
    Witness ready{raw};
    check_witness(net, ready);
    return ready;
  } catch (const std::invalid_argument&) {
  }
  auto rep = validate_fluid_solution(net, raw, kTol);
  if (!rep.ok())
    throw std::invalid_argument("normalize_witness: input fails fluid checks: " +
                                rep.summary());
  // t0: last breakpoint with positive total queue.
  int i0 = -1;
  for (int k = static_cast<int>(raw.points()) - 1; k >= 0; --k)
    if (norm1(raw.q[k]) > kTol) {
      i0 = k;
      break;
    }
  if (i0 <= 0)
    throw std::invalid_argument("normalize_witness: solution never leaves zero");
  // t_hat: last zero of the (piecewise-linear, hence segment-wise linear)
  // total queue before t0. Since coordinates are nonnegative, a zero inside a
  // segment forces the segment endpoint to be zero too, so breakpoints suffice.
  int ih = -1;
  for (int k = i0 - 1; k >= 0; --k)
    if (norm1(raw.q[k]) <= kTol) {
      ih = k;
      break;
    }
  if (ih < 0)
    throw std::invalid_argument("normalize_witness: no zero state precedes the growth");
  // Prefer the latest start whose residual mass stays sub-tolerance after the
  // 1/(t0 - t_hat) rescale, so the output still passes the zero-start check.
  for (int k = i0 - 1; k >= 0; --k)
    if (norm1(raw.q[k]) <= 0.5 * kTol * (raw.times[i0] - raw.times[k])) {
      ih = k;
      break;
    }
  const double t0 = raw.times[i0], that = raw.times[ih];
  auto piece = restrict_solution(raw, that, t0);
  // Shifting and rescaling shrink the magnitudes of times and allocations,
  // but the absolute rounding of the source representation stays behind, so
  // a fully busy station can measure fractionally idle on short segments
  // afterwards. While the rows still carry the source magnitudes, snap
  // station rates within rounding distance of full back to exactly full.
  {
    const int d = piece.dim();
    const double eps = std::numeric_limits<double>::epsilon();
    for (size_t k = 0; k + 1 < piece.points(); ++k) {
      const double du = piece.times[k + 1] - piece.times[k];
      if (du <= 0) continue;
      std::vector<double> inc(d);
      for (int c = 0; c < d; ++c) inc[c] = piece.t[k + 1][c] - piece.t[k][c];
      for (int s = 0; s < net.stations; ++s) {
        double S = 0.0, repr = 2.0 * (std::abs(piece.times[k]) + std::abs(piece.times[k + 1]));
        for (int c : net.station_classes[s]) {
          S += inc[c];
          repr += std::abs(piece.t[k][c]) + std::abs(piece.t[k + 1][c]);
        }
        const double window = 4.0 * eps * repr / du;
        if (S < du && S >= du * (1.0 - window))
          for (int c : net.station_classes[s]) inc[c] *= du / S;
      }
      for (int c = 0; c < d; ++c) piece.t[k + 1][c] = piece.t[k][c] + inc[c];
    }
  }
  piece = shift_to_zero(piece);
  // Force an exact zero origin (the restriction may carry sub-tolerance mass).
  piece.q.front().assign(piece.dim(), 0.0);
  Witness w{scale_solution(piece, 1.0 / (t0 - that))};
  w.sol.times.back() = 1.0;
  check_witness(net, w);
  return w;
}

DivergenceCertificate gamma_of_witness(const NetworkSpec& net, const Witness& w,
                                       double qnorm) {
  check_witness(net, w);
  const auto c = derived_constants(net);
  const double w1 = total_queue(w.sol, 1.0);
  DivergenceCertificate cert;
  if (w1 >= 4.0 * c.c_big) {
    cert.gamma0 = w1 / 4.0;
    cert.gamma1 = w1 / 4.0;
  } else {
    const double a = w1 / (4.0 * c.c_big);
    // Exact minimum of the piecewise-linear norm over [a, 1].
    double g1 = std::min(total_queue(w.sol, a), total_queue(w.sol, 1.0));
    for (size_t k = 0; k < w.sol.points(); ++k)
      if (w.sol.times[k] > a && w.sol.times[k] < 1.0)
        g1 = std::min(g1, norm1(w.sol.q[k]));
    cert.gamma1 = g1;
    cert.gamma0 = std::min(w1 / 4.0, g1);
  }
  cert.gamma = cert.gamma0 / 2.0;
  cert.floor_bound = (qnorm / 2.0) * std::min(cert.gamma / c.c_big, 1.0);
  return cert;
}

FluidSolution build_divergent(const NetworkSpec& net, const Witness& w,
                              const std::vector<double>& q, double horizon) {
  check_witness(net, w);
  const int d = net.class_count;
  if (static_cast<int>(q.size()) != d)
    throw std::invalid_argument("build_divergent: q dimension mismatch");
  for (double v : q)
    if (v < 0) throw std::invalid_argument("build_divergent: q must be nonnegative");
  if (!(horizon >= 1.0)) throw std::invalid_argument("build_divergent: horizon < 1");

  // Leftover capacity goes to the station's classes in index order.
  const std::vector<std::vector<int>>& fill_order = net.station_classes;
  const std::vector<double> no_inflow(d, 0.0);

  FluidSolution out;
  std::vector<double> excess = q;  // carried mass, no external inflow
  std::vector<double> Tcum(d, 0.0);
  out.append_point(0.0, excess, Tcum);

  int events = 0;
  const int event_cap = 2000000;
  double bstart = 0.0, scale = 1.0;
  while (bstart < horizon - 1e-12) {
    const FluidSolution ws = scale_solution(w.sol, scale);  // replay on [0, scale]
    for (size_t k = 0; k + 1 < ws.points(); ++k) {
      const double u0 = ws.times[k], u1 = ws.times[k + 1];
      const double seglen = u1 - u0;
      if (seglen <= 0) continue;
      std::vector<double> rho_w(d);
      for (int c = 0; c < d; ++c) rho_w[c] = (ws.t[k + 1][c] - ws.t[k][c]) / seglen;
      std::vector<double> cap(net.stations, 1.0);
      for (int c = 0; c < d; ++c) cap[net.station_of[c]] -= rho_w[c];
      for (auto& v : cap) v = std::max(0.0, v);

      double u = u0;
      while (u < u1 - 1e-15) {
        if (++events > event_cap)
          throw std::runtime_error("build_divergent: event cap exceeded");
        const auto rho_e = detail::priority_rates(net, fill_order, excess, cap, no_inflow);
        std::vector<double> slope(d);
        for (int c = 0; c < d; ++c) {
          const double in = net.class_stage[c] == 0 ? 0.0 : net.mu(c - 1) * rho_e[c - 1];
          slope[c] = in - net.mu(c) * rho_e[c];
        }
        double dt = u1 - u;
        for (int c = 0; c < d; ++c)
          if (slope[c] < -1e-13 && excess[c] > 0.0)
            dt = std::min(dt, excess[c] / -slope[c]);
        if (bstart + u + dt > horizon) dt = horizon - (bstart + u);
        if (dt <= 0) dt = 0.0;
        for (int c = 0; c < d; ++c) {
          excess[c] = std::max(0.0, excess[c] + slope[c] * dt);
          if (excess[c] < 1e-13) excess[c] = 0.0;
          Tcum[c] += (rho_w[c] + rho_e[c]) * dt;
        }
        u += dt;
        // Combined state: replayed witness plus the carried excess.
        const double frac = (u >= u1 - 1e-15) ? 1.0 : (u - u0) / seglen;
        std::vector<double> qrow(d);
        for (int c = 0; c < d; ++c)
          qrow[c] = excess[c] + ws.q[k][c] + frac * (ws.q[k + 1][c] - ws.q[k][c]);
        out.append_point(bstart + u, qrow, Tcum);
        if (bstart + u >= horizon - 1e-12) return out;
      }
    }
    // Block boundary: the replayed mass joins the carried excess and the
    // witness restarts from zero at double the scale.
    for (int c = 0; c < d; ++c) excess[c] += ws.q.back()[c];
    bstart += scale;
    scale = bstart;
  }
  return out;
}

bool verify_linear_divergence(const FluidSolution& sol, double gamma, double tol) {
  for (size_t k = 0; k < sol.points(); ++k) {
    if (norm1(sol.q[k]) < gamma * sol.times[k] - tol) return false;
    if (k + 1 < sol.points()) {
      const double mid = 0.5 * (sol.times[k] + sol.times[k + 1]);
      if (total_queue(sol, mid) < gamma * mid - tol) return false;
    }
  }
  return true;
}

}  // namespace fnet
