#include "fnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm1_int(const std::vector<long long>& v) {
  double s = 0.0;
  for (long long x : v) s += static_cast<double>(x);
  return s;
}

// Sampled queue vector at the sample time closest to t.
const std::vector<long long>& sample_near(const SimTrace& tr, double t) {
  const auto it =
      std::lower_bound(tr.sample_times.begin(), tr.sample_times.end(), t);
  size_t k = it - tr.sample_times.begin();
  if (k == tr.sample_times.size()) return tr.q_samples.back();
  if (k > 0 && t - tr.sample_times[k - 1] < tr.sample_times[k] - t) --k;
  return tr.q_samples[k];
}

}  // namespace

StabilityReport rate_stability_estimate(const NetworkSpec& net,
                                        const std::vector<SimTrace>& traces,
                                        double tol) {
  if (traces.empty())
    throw std::invalid_argument("rate_stability_estimate: empty ensemble");
  const double T = traces.front().sample_times.back();
  if (!(T > 0)) throw std::invalid_argument("rate_stability_estimate: zero horizon");
  for (const auto& tr : traces)
    if (std::abs(tr.sample_times.back() - T) > 1e-6)
      throw std::invalid_argument("rate_stability_estimate: horizons differ");

  StabilityReport rep;
  const int I = static_cast<int>(net.types.size());
  const int d = net.class_count;
  double lambda_min = kInf;
  for (const auto& ty : net.types) lambda_min = std::min(lambda_min, ty.lambda);
  rep.tol = tol > 0 ? tol : 3.0 / std::sqrt(std::max(1e-12, lambda_min) * T);

  rep.types.resize(I);
  rep.q_over_t.assign(d, 0.0);
  for (int i = 0; i < I; ++i) {
    const int exit_class = net.cls(i, static_cast<int>(net.types[i].route.size()) - 1);
    double thr = 0.0;
    for (const auto& tr : traces)
      thr += static_cast<double>(tr.d_samples.back()[exit_class]) / T;
    rep.types[i].lambda = net.types[i].lambda;
    rep.types[i].throughput = thr / traces.size();
    rep.types[i].gap = std::abs(rep.types[i].throughput - rep.types[i].lambda);
  }
  for (const auto& tr : traces)
    for (int c = 0; c < d; ++c)
      rep.q_over_t[c] += static_cast<double>(tr.q_samples.back()[c]) / T / traces.size();

  rep.rate_stable_evidence = true;
  for (const auto& t : rep.types)
    if (t.gap > rep.tol) rep.rate_stable_evidence = false;
  rep.sublinear_evidence = true;
  for (double v : rep.q_over_t)
    if (v > rep.tol) rep.sublinear_evidence = false;

  std::vector<double> divs;
  divs.reserve(traces.size());
  for (const auto& tr : traces) divs.push_back(divergence_estimate(tr));
  std::sort(divs.begin(), divs.end());
  rep.divergence_p5 = divs[static_cast<size_t>(0.05 * (divs.size() - 1))];
  return rep;
}

double divergence_estimate(const SimTrace& trace, double window_fraction) {
  if (!(window_fraction > 0) || !(window_fraction < 1))
    throw std::invalid_argument("divergence_estimate: window_fraction in (0,1)");
  const double T = trace.sample_times.back();
  const double start = T * (1.0 - window_fraction);
  double lo = kInf;
  for (size_t k = 0; k < trace.sample_times.size(); ++k) {
    const double t = trace.sample_times[k];
    if (t < start || t <= 0) continue;
    lo = std::min(lo, norm1_int(trace.q_samples[k]) / t);
  }
  return lo < kInf ? lo : 0.0;
}

std::vector<ClosenessRow> closeness_report(const NetworkSpec& net,
                                           const std::vector<SimTrace>& traces,
                                           const AllocationPlan& plan) {
  if (traces.empty()) throw std::invalid_argument("closeness_report: empty ensemble");
  const int d = net.class_count;
  if (plan.fluid.dim() != d || plan.cut_times.size() < 2)
    throw std::invalid_argument("closeness_report: plan does not match the network");
  for (const auto& tr : traces)
    if (static_cast<int>(tr.q_samples.front().size()) != d)
      throw std::invalid_argument("closeness_report: trace dimension mismatch");
  const auto cons = derived_constants(net);
  const double logc = std::log(cons.c_big);

  std::vector<ClosenessRow> rows;
  rows.reserve(plan.grid.size());
  for (double tm : plan.grid) {
    ClosenessRow row;
    row.time = tm;
    int r = 0;
    while (r + 2 < static_cast<int>(plan.cut_times.size()) &&
           tm >= plan.cut_times[r + 1] - 1e-12)
      ++r;
    row.segment = r;
    const double logb = std::log(plan.delta) + (r + 3) * logc + std::log(plan.n);
    row.bound = logb > 700.0 ? kInf : std::exp(logb);
    const auto qbar = plan.fluid.q_at(std::min(tm, plan.fluid.t_end()));
    int within = 0;
    for (const auto& tr : traces) {
      const auto& q = sample_near(tr, tm);
      bool ok = true;
      for (int c = 0; c < d && ok; ++c)
        if (std::abs(static_cast<double>(q[c]) - qbar[c]) > row.bound) ok = false;
      within += ok;
    }
    row.fraction = static_cast<double>(within) / traces.size();
    rows.push_back(row);
  }
  return rows;
}

double closeness_all_within(const NetworkSpec& net, const std::vector<SimTrace>& traces,
                            const AllocationPlan& plan) {
  int all = 0;
  for (const auto& tr : traces) {
    bool ok = true;
    for (const auto& row : closeness_report(net, {tr}, plan))
      if (row.fraction < 1.0) {
        ok = false;
        break;
      }
    all += ok;
  }
  return traces.empty() ? 0.0 : static_cast<double>(all) / traces.size();
}

}  // namespace fnet
