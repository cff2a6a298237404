#include <doctest.h>

#include <cmath>

#include "fnet/analysis.hpp"
#include "fnet/fixtures.hpp"

using namespace fnet;

namespace {

// Trace with ||Q(t)|| = slope * t exactly at every sample.
SimTrace linear_trace(double slope, double horizon, int samples, double time_scale) {
  SimTrace tr;
  tr.q0 = {0};
  for (int k = 0; k <= samples; ++k) {
    const double t = horizon * k / samples;
    tr.sample_times.push_back(t * time_scale);
    tr.q_samples.push_back({static_cast<long long>(std::llround(slope * t * time_scale))});
    tr.a_samples.push_back({0});
    tr.d_samples.push_back({0});
    tr.t_samples.push_back({0.0});
  }
  tr.window_min_station.assign(samples, {0});
  return tr;
}

}  // namespace

TEST_CASE("divergence estimate on exact linear growth") {
  // Integer samples align exactly when slope * t is integral on the grid.
  const auto one = linear_trace(1.0, 100.0, 100, 1.0);
  CHECK(divergence_estimate(one) == doctest::Approx(1.0));
  // Time-axis scaling leaves the ratio invariant.
  const auto scaled = linear_trace(1.0, 100.0, 100, 4.0);
  CHECK(divergence_estimate(scaled) == doctest::Approx(1.0));
  // The identically-zero trace has no growth.
  const auto zero = linear_trace(0.0, 100.0, 100, 1.0);
  CHECK(divergence_estimate(zero) == 0.0);
  CHECK_THROWS_AS(divergence_estimate(one, 1.5), std::invalid_argument);
}

TEST_CASE("stable single queue yields rate-stable evidence") {
  const auto net = fixtures::single_queue();
  std::vector<SimTrace> traces;
  SimOptions opt;
  opt.sample_dt = 500.0;
  for (int s = 0; s < 10; ++s) {
    auto pol = fifo_policy();
    traces.push_back(simulate(net, *pol, SimState::empty(net), 5000.0, 1000 + s, opt));
  }
  const auto rep = rate_stability_estimate(net, traces);
  REQUIRE(rep.types.size() == 1);
  CHECK(rep.types[0].gap <= rep.tol);
  CHECK(rep.rate_stable_evidence);
  CHECK(rep.sublinear_evidence);
  CHECK(rep.divergence_p5 <= rep.tol);
  CHECK_THROWS_AS(rate_stability_estimate(net, {}), std::invalid_argument);
}

TEST_CASE("supervised crossover runs are not rate stable") {
  const auto net = fixtures::rybko_stolyar();
  const Witness w{fixtures::rs_witness()};
  auto st0 = SimState::empty(net);
  st0.q = {50, 50, 50, 50};
  SupervisorConfig cfg;
  cfg.max_epochs = 3;
  cfg.sample_dt = 2.0;
  std::vector<SimTrace> traces;
  for (int s = 0; s < 5; ++s)
    traces.push_back(supervisor_run(net, w, st0, cfg, 1e9, 90 + s, nullptr));
  // Horizons differ per seed; evaluate divergence per trace instead.
  for (const auto& tr : traces) CHECK(divergence_estimate(tr) > 0.01);
}

TEST_CASE("closeness fractions against the planned fluid") {
  const auto net = fixtures::rybko_stolyar();
  const Witness w{fixtures::rs_witness()};
  auto plan = std::make_shared<AllocationPlan>(
      build_allocation_plan(net, w, {25.0, 25.0, 25.0, 25.0}));
  std::vector<SimTrace> traces;
  SimOptions opt;
  opt.sample_dt = 1.0;
  for (int s = 0; s < 8; ++s) {
    auto pol = tracker_policy(plan);
    auto st0 = SimState::empty(net);
    st0.q = {25, 25, 25, 25};
    traces.push_back(simulate(net, *pol, st0, plan->theta0, 500 + s, opt));
  }
  const auto rows = closeness_report(net, traces, *plan);
  REQUIRE(rows.size() == plan->grid.size());
  for (const auto& r : rows) {
    CHECK(r.fraction >= 0.0);
    CHECK(r.fraction <= 1.0);
    CHECK(r.bound > 0.0);
    CHECK(r.segment >= 0);
    CHECK(r.segment < plan->segments);
  }
  // The proof-grade bound dwarfs desk-scale fluctuations.
  CHECK(closeness_all_within(net, traces, *plan) == doctest::Approx(1.0));

  AllocationPlan broken = *plan;
  broken.cut_times.clear();
  CHECK_THROWS_AS(closeness_report(net, traces, broken), std::invalid_argument);
}

TEST_CASE("deterministic control matches its fluid plan exactly") {
  // Overloaded single queue with deterministic primitives: arrivals every 0.5,
  // services of length 1, so Q(t) = q0 + floor(2t) - floor(t) tracks the fluid
  // q0 + t within 2 jobs at every grid time.
  NetworkSpec net;
  net.stations = 1;
  TypeSpec ty;
  ty.route = {0};
  ty.lambda = 2.0;
  ty.arrival = DistSpec::deterministic(0.5);
  ty.stages.push_back({1.0, DistSpec::deterministic(1.0)});
  net.types.push_back(ty);
  net.finalize();

  AllocationPlan plan;
  plan.n = 10.0;
  plan.gamma = 1.0;
  plan.theta = 1.0;
  plan.theta0 = 10.0;
  plan.delta = 0.1;
  plan.segments = 1;
  plan.cut_times = {0.0, 10.0};
  plan.serve_order = net.station_classes;
  for (int m = 0; m <= 10; ++m) plan.grid.push_back(m);
  plan.allocations.assign(10, {1.0});
  plan.fluid.append_point(0.0, {10.0}, {0.0});
  plan.fluid.append_point(10.0, {20.0}, {10.0});

  auto shared = std::make_shared<AllocationPlan>(plan);
  auto pol = tracker_policy(shared);
  auto st0 = SimState::empty(net);
  st0.q = {10};
  SimOptions opt;
  opt.sample_dt = 1.0;
  std::vector<SimTrace> traces{simulate(net, *pol, st0, 10.0, 1, opt)};
  CHECK(closeness_all_within(net, traces, plan) == doctest::Approx(1.0));
}
