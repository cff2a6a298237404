#pragma once

#include <cstdint>

#include "fnet/dist.hpp"
#include "fnet/network.hpp"

namespace fnet {

// Exponential-tail certificate: F(theta) bounds E[exp(theta (Z - z)) | Z >= z]
// uniformly in the residual z, and is finite on [0, theta_sup).
struct LdCertificate {
  DistSpec dist;
  double theta_sup = 0.0;
  double f_bound(double theta) const;
};

// Closed forms per family: exponential(rate) -> rate/(rate-theta); bounded
// support b -> exp(theta b); erlang(k, rate) -> (rate/(rate-theta))^k (the
// worst residual starts all k phases afresh). Throws on a malformed spec.
LdCertificate check_exptail(const DistSpec& dist);

enum class TailDirection { upper, lower };

struct ChernoffResult {
  double L = 0.0;           // exponential rate; +infinity when unreachable
  double theta_star = 0.0;  // optimizing tilt
  double V = 1.0;           // prefactor F(theta_star)
};

// Optimal exponential rate for P(sum of n draws >= n (mean + eps)) (upper) or
// <= n (mean - eps) (lower): maximizes theta (mean +- eps) - log mgf(+-theta)
// by golden-section search to 1e-10. Deviations outside the support are
// reported with L = +infinity. Requires eps > 0, and eps < mean for lower.
ChernoffResult chernoff_rate(const DistSpec& dist, double epsilon, TailDirection dir);

// Monte-Carlo frequency of |sum_{i<=n} Z_i - z - mean*n| >= eps*n with Z_1
// drawn conditioned on Z_1 >= z.
double empirical_ld_time(const DistSpec& dist, double epsilon, int n, double z,
                         int trials, std::uint64_t seed);

// Monte-Carlo frequency of |N(t+z) - t/mean| >= eps*t for the renewal counting
// process whose first interarrival is conditioned on Z_1 >= z.
double empirical_ld_rate(const DistSpec& dist, double epsilon, double t, double z,
                         int trials, std::uint64_t seed);

// Network-level pair: smallest rate and largest prefactor across every
// primitive sequence (each type's interarrivals and each class's services),
// over both tail directions; infinite rates are skipped. The aggregation
// (min L, max V) is a reporting convention, flagged by `aggregated`.
struct NetworkLd {
  double L = 0.0;
  double V = 1.0;
  bool aggregated = true;
};
NetworkLd network_ld(const NetworkSpec& net, double epsilon);

}  // namespace fnet
