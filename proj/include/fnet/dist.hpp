#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fnet/rng.hpp"

namespace fnet {

enum class DistFamily { exponential, erlang, deterministic, uniform_bounded };

// Interarrival / service time distribution. Families:
//   exponential      params = {rate}
//   erlang           params = {k, rate}        (sum of k exponential(rate) phases)
//   deterministic    params = {a}
//   uniform-bounded  params = {a, b}, 0 <= a < b
struct DistSpec {
  DistFamily family = DistFamily::exponential;
  std::vector<double> params;

  static DistSpec exponential(double rate) { return {DistFamily::exponential, {rate}}; }
  static DistSpec erlang(int k, double rate) {
    return {DistFamily::erlang, {static_cast<double>(k), rate}};
  }
  static DistSpec deterministic(double a) { return {DistFamily::deterministic, {a}}; }
  static DistSpec uniform(double a, double b) { return {DistFamily::uniform_bounded, {a, b}}; }

  double mean() const;
  // True when the parameters define a finite-mean nonnegative distribution.
  bool well_formed() const;
  std::string family_name() const;

  // Moment generating function E[exp(theta Z)]; +inf where divergent.
  double mgf(double theta) const;
  // Supremum of the interval on which the mgf is finite (+inf for bounded support).
  double mgf_theta_sup() const;
  // Least upper bound of the support; +inf for unbounded families.
  double support_max() const;

  double sample(Rng& rng) const;
  // Draw Z conditioned on Z >= z. Exact for exponential (memorylessness),
  // deterministic and uniform (truncated inverse CDF); rejection for erlang.
  // Returns false when the conditioning event is null (z above the support)
  // or the rejection cap is hit.
  bool sample_conditional(double z, Rng& rng, double& out,
                          int rejection_cap = 10000) const;
};

DistFamily dist_family_from_name(const std::string& name);

}  // namespace fnet
