#include "fnet/dist.hpp"

#include <cmath>
#include <limits>

namespace fnet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double sample_exponential(double rate, Rng& rng) {
  // Inverse CDF on a [0,1) uniform; -log1p(-u) keeps the tail accurate.
  return -std::log1p(-rng.next_double()) / rate;
}
}  // namespace

double DistSpec::mean() const {
  switch (family) {
    case DistFamily::exponential: return 1.0 / params[0];
    case DistFamily::erlang: return params[0] / params[1];
    case DistFamily::deterministic: return params[0];
    case DistFamily::uniform_bounded: return 0.5 * (params[0] + params[1]);
  }
  return 0.0;
}

bool DistSpec::well_formed() const {
  auto finite_pos = [](double x) { return std::isfinite(x) && x > 0.0; };
  switch (family) {
    case DistFamily::exponential:
      return params.size() == 1 && finite_pos(params[0]);
    case DistFamily::erlang:
      return params.size() == 2 && params[0] >= 1.0 &&
             params[0] == std::floor(params[0]) && finite_pos(params[1]);
    case DistFamily::deterministic:
      return params.size() == 1 && finite_pos(params[0]);
    case DistFamily::uniform_bounded:
      return params.size() == 2 && params[0] >= 0.0 && std::isfinite(params[1]) &&
             params[1] > params[0];
  }
  return false;
}

std::string DistSpec::family_name() const {
  switch (family) {
    case DistFamily::exponential: return "exponential";
    case DistFamily::erlang: return "erlang";
    case DistFamily::deterministic: return "deterministic";
    case DistFamily::uniform_bounded: return "uniform-bounded";
  }
  return "?";
}

double DistSpec::mgf(double theta) const {
  switch (family) {
    case DistFamily::exponential: {
      const double rate = params[0];
      return theta < rate ? rate / (rate - theta) : kInf;
    }
    case DistFamily::erlang: {
      const double k = params[0], rate = params[1];
      return theta < rate ? std::pow(rate / (rate - theta), k) : kInf;
    }
    case DistFamily::deterministic:
      return std::exp(theta * params[0]);
    case DistFamily::uniform_bounded: {
      const double a = params[0], b = params[1];
      if (std::abs(theta) < 1e-12) {
        // Series expansion around theta = 0 avoids cancellation.
        const double m = 0.5 * (a + b);
        return 1.0 + theta * m + 0.5 * theta * theta * (a * a + a * b + b * b) / 3.0;
      }
      return (std::exp(theta * b) - std::exp(theta * a)) / (theta * (b - a));
    }
  }
  return kInf;
}

double DistSpec::mgf_theta_sup() const {
  switch (family) {
    case DistFamily::exponential: return params[0];
    case DistFamily::erlang: return params[1];
    case DistFamily::deterministic:
    case DistFamily::uniform_bounded: return kInf;
  }
  return 0.0;
}

double DistSpec::support_max() const {
  switch (family) {
    case DistFamily::exponential:
    case DistFamily::erlang: return kInf;
    case DistFamily::deterministic: return params[0];
    case DistFamily::uniform_bounded: return params[1];
  }
  return kInf;
}

double DistSpec::sample(Rng& rng) const {
  switch (family) {
    case DistFamily::exponential:
      return sample_exponential(params[0], rng);
    case DistFamily::erlang: {
      const int k = static_cast<int>(params[0]);
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += sample_exponential(params[1], rng);
      return s;
    }
    case DistFamily::deterministic:
      return params[0];
    case DistFamily::uniform_bounded:
      return params[0] + (params[1] - params[0]) * rng.next_double();
  }
  return 0.0;
}

bool DistSpec::sample_conditional(double z, Rng& rng, double& out,
                                  int rejection_cap) const {
  if (z <= 0.0) {
    out = sample(rng);
    return true;
  }
  switch (family) {
    case DistFamily::exponential:
      out = z + sample_exponential(params[0], rng);
      return true;
    case DistFamily::deterministic:
      if (z > params[0]) return false;
      out = params[0];
      return true;
    case DistFamily::uniform_bounded: {
      const double a = params[0], b = params[1];
      if (z >= b) return false;
      const double lo = std::max(a, z);
      out = lo + (b - lo) * rng.next_double();
      return true;
    }
    case DistFamily::erlang: {
      for (int i = 0; i < rejection_cap; ++i) {
        const double x = sample(rng);
        if (x >= z) {
          out = x;
          return true;
        }
      }
      return false;
    }
  }
  return false;
}

DistFamily dist_family_from_name(const std::string& name) {
  if (name == "exponential") return DistFamily::exponential;
  if (name == "erlang") return DistFamily::erlang;
  if (name == "deterministic") return DistFamily::deterministic;
  if (name == "uniform-bounded") return DistFamily::uniform_bounded;
  throw std::invalid_argument("unknown distribution family: " + name);
}

}  // namespace fnet
