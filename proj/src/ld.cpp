#include "fnet/ld.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double support_min(const DistSpec& d) {
  switch (d.family) {
    case DistFamily::exponential:
    case DistFamily::erlang:
      return 0.0;
    case DistFamily::deterministic:
      return d.params[0];
    case DistFamily::uniform_bounded:
      return d.params[0];
  }
  return 0.0;
}

// Objective of the tilted bound; concave in theta on the finiteness interval.
double objective(const DistSpec& d, double target, TailDirection dir, double theta) {
  const double sgn = dir == TailDirection::upper ? 1.0 : -1.0;
  const double m = d.mgf(sgn * theta);
  if (!(m < kInf) || m <= 0.0) return -kInf;
  return sgn * theta * target - std::log(m);
}

double golden_max(const DistSpec& d, double target, TailDirection dir, double lo,
                  double hi, double* arg) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = objective(d, target, dir, x1), f2 = objective(d, target, dir, x2);
  while (b - a > 1e-12 * (1.0 + b)) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = objective(d, target, dir, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = objective(d, target, dir, x1);
    }
  }
  const double x = 0.5 * (a + b);
  if (arg) *arg = x;
  return objective(d, target, dir, x);
}

}  // namespace

double LdCertificate::f_bound(double theta) const {
  if (theta < 0) throw std::invalid_argument("f_bound: theta must be nonnegative");
  if (theta >= theta_sup) return kInf;
  switch (dist.family) {
    case DistFamily::exponential:
      return dist.params[0] / (dist.params[0] - theta);
    case DistFamily::erlang: {
      const int k = static_cast<int>(dist.params[0]);
      return std::pow(dist.params[1] / (dist.params[1] - theta), k);
    }
    case DistFamily::deterministic:
      return std::exp(theta * dist.params[0]);
    case DistFamily::uniform_bounded:
      return std::exp(theta * dist.params[1]);
  }
  return kInf;
}

LdCertificate check_exptail(const DistSpec& dist) {
  if (!dist.well_formed())
    throw std::invalid_argument("check_exptail: malformed distribution");
  LdCertificate cert;
  cert.dist = dist;
  cert.theta_sup = dist.mgf_theta_sup();
  return cert;
}

ChernoffResult chernoff_rate(const DistSpec& dist, double epsilon, TailDirection dir) {
  if (!(epsilon > 0)) throw std::invalid_argument("chernoff_rate: epsilon must be positive");
  const double alpha = dist.mean();
  if (dir == TailDirection::lower && !(epsilon < alpha))
    throw std::invalid_argument("chernoff_rate: lower deviation needs epsilon < mean");
  ChernoffResult res;
  const double target =
      dir == TailDirection::upper ? alpha + epsilon : alpha - epsilon;
  // Deviations outside the support cannot occur at all.
  if (dir == TailDirection::upper && target >= dist.support_max()) {
    res.L = kInf;
    res.theta_star = kInf;
    res.V = 1.0;
    return res;
  }
  if (dir == TailDirection::lower && target < support_min(dist) + 1e-15) {
    res.L = kInf;
    res.theta_star = kInf;
    res.V = 1.0;
    return res;
  }
  double hi;
  if (dir == TailDirection::upper) {
    const double sup = dist.mgf_theta_sup();
    hi = sup < kInf ? sup * (1.0 - 1e-12) : 0.0;
    if (!(hi > 0)) {
      // Unbounded finiteness interval: grow the bracket geometrically until
      // the concave objective starts decreasing.
      hi = 1.0;
      while (objective(dist, target, dir, 2.0 * hi) >
             objective(dist, target, dir, hi))
        hi *= 2.0;
      hi *= 2.0;
    }
  } else {
    hi = 1.0;
    while (objective(dist, target, dir, 2.0 * hi) > objective(dist, target, dir, hi))
      hi *= 2.0;
    hi *= 2.0;
  }
  res.L = golden_max(dist, target, dir, 0.0, hi, &res.theta_star);
  if (res.L < 0) res.L = 0;
  const auto cert = check_exptail(dist);
  res.V = res.theta_star < cert.theta_sup ? cert.f_bound(res.theta_star) : 1.0;
  return res;
}

double empirical_ld_time(const DistSpec& dist, double epsilon, int n, double z,
                         int trials, std::uint64_t seed) {
  if (n < 1 || trials < 1)
    throw std::invalid_argument("empirical_ld_time: n and trials must be positive");
  const double alpha = dist.mean();
  Rng rng = Rng::stream(seed, "ld:time");
  long long hits = 0;
  for (int t = 0; t < trials; ++t) {
    double first = 0.0;
    if (!dist.sample_conditional(z, rng, first)) continue;  // null conditioning
    double s = first;
    for (int i = 1; i < n; ++i) s += dist.sample(rng);
    if (std::abs(s - z - alpha * n) >= epsilon * n) ++hits;
  }
  return static_cast<double>(hits) / trials;
}

double empirical_ld_rate(const DistSpec& dist, double epsilon, double t, double z,
                         int trials, std::uint64_t seed) {
  if (!(t > 0) || trials < 1)
    throw std::invalid_argument("empirical_ld_rate: t and trials must be positive");
  const double alpha = dist.mean();
  Rng rng = Rng::stream(seed, "ld:rate");
  long long hits = 0;
  for (int k = 0; k < trials; ++k) {
    double first = 0.0;
    if (!dist.sample_conditional(z, rng, first)) continue;
    double s = first;
    long long count = 0;
    while (s <= t + z) {
      ++count;
      s += dist.sample(rng);
    }
    if (std::abs(static_cast<double>(count) - t / alpha) >= epsilon * t) ++hits;
  }
  return static_cast<double>(hits) / trials;
}

NetworkLd network_ld(const NetworkSpec& net, double epsilon) {
  NetworkLd agg;
  agg.L = kInf;
  agg.V = 1.0;
  auto fold = [&](const DistSpec& d) {
    for (TailDirection dir : {TailDirection::upper, TailDirection::lower}) {
      if (dir == TailDirection::lower && epsilon >= d.mean()) continue;
      const auto r = chernoff_rate(d, epsilon, dir);
      if (r.L < kInf) {
        agg.L = std::min(agg.L, r.L);
        agg.V = std::max(agg.V, r.V);
      }
    }
  };
  for (const auto& ty : net.types) {
    fold(ty.arrival);
    for (const auto& st : ty.stages) fold(st.service);
  }
  if (!(agg.L < kInf))
    throw std::invalid_argument("network_ld: no finite deviation rate at this epsilon");
  return agg;
}

}  // namespace fnet
