#include <doctest.h>

#include <cmath>

#include "fnet/fixtures.hpp"
#include "fnet/sim.hpp"

using namespace fnet;

namespace {

class AlwaysIdlePolicy : public Policy {
 public:
  int choose(const PolicyContext&, int) override { return -1; }
};

class WrongClassPolicy : public Policy {
 public:
  int choose(const PolicyContext&, int) override { return 0; }
};

double norm1(const std::vector<long long>& v) {
  double s = 0;
  for (long long x : v) s += static_cast<double>(x);
  return s;
}

}  // namespace

TEST_CASE("deterministic single queue: exact departure count and reproducibility") {
  const auto net = fixtures::single_queue_deterministic();
  auto pol = fifo_policy();
  const auto st0 = SimState::empty(net);
  SimOptions opt;
  opt.sample_dt = 1.0;
  const auto tr = simulate(net, *pol, st0, 10.0, 7, opt);
  // Arrivals at 1..10, services take 0.5: departures at 1.5, ..., 9.5.
  CHECK(tr.a_samples.back()[0] == 10);
  CHECK(tr.d_samples.back()[0] == 9);
  CHECK(tr.q_samples.back()[0] == 1);
  CHECK(verify_trace(net, tr).ok());

  auto pol2 = fifo_policy();
  const auto tr2 = simulate(net, *pol2, st0, 10.0, 7, opt);
  CHECK(trace_to_csv(net, tr) == trace_to_csv(net, tr2));
}

TEST_CASE("fifo and lifo agree on a single-class deterministic queue") {
  const auto net = fixtures::single_queue_deterministic();
  const auto st0 = SimState::empty(net);
  auto f = fifo_policy();
  auto l = lifo_policy();
  const auto trf = simulate(net, *f, st0, 100.0, 3);
  const auto trl = simulate(net, *l, st0, 100.0, 3);
  CHECK(trf.d_samples.back()[0] == trl.d_samples.back()[0]);
}

TEST_CASE("stable single queue throughput matches the arrival rate") {
  const auto net = fixtures::single_queue();  // lambda 1, mu 2
  auto pol = fifo_policy();
  SimOptions opt;
  opt.sample_dt = 100.0;
  const double T = 10000.0;
  const auto tr = simulate(net, *pol, SimState::empty(net), T, 11, opt);
  CHECK(verify_trace(net, tr).ok());
  const double rate = static_cast<double>(tr.d_samples.back()[0]) / T;
  CHECK(std::abs(rate - 1.0) <= 0.05);
}

TEST_CASE("traces are seed-deterministic and seed-sensitive") {
  const auto net = fixtures::rybko_stolyar();
  SimOptions opt;
  opt.sample_dt = 5.0;
  auto p1 = gfifo_policy();
  auto p2 = gfifo_policy();
  auto p3 = gfifo_policy();
  const auto a = simulate(net, *p1, SimState::empty(net), 50.0, 42, opt);
  const auto b = simulate(net, *p2, SimState::empty(net), 50.0, 42, opt);
  const auto c = simulate(net, *p3, SimState::empty(net), 50.0, 43, opt);
  CHECK(trace_to_csv(net, a) == trace_to_csv(net, b));
  CHECK(trace_to_csv(net, a) != trace_to_csv(net, c));
  CHECK(verify_trace(net, a).ok());
}

TEST_CASE("exit-stage priority grows the crossover network's backlog") {
  const auto net = fixtures::rybko_stolyar();
  auto pol = static_priority_policy(net, fixtures::rs_exit_priority());
  auto st0 = SimState::empty(net);
  st0.q = {0, 50, 0, 50};
  SimOptions opt;
  opt.sample_dt = 10.0;
  const auto tr = simulate(net, *pol, st0, 200.0, 5, opt);
  CHECK(verify_trace(net, tr).ok());
  CHECK(norm1(tr.q_samples.back()) > 120.0);
}

TEST_CASE("runtime guards reject idling and invalid choices") {
  const auto net = fixtures::single_queue();
  auto st0 = SimState::empty(net);
  st0.q = {5};
  AlwaysIdlePolicy idle;
  CHECK_THROWS_WITH_AS(simulate(net, idle, st0, 1.0, 1),
                       doctest::Contains("non-idling"), std::runtime_error);

  const auto rs = fixtures::rybko_stolyar();
  auto rs0 = SimState::empty(rs);
  rs0.q = {0, 0, 1, 0};  // class 0 lives at station 0 but is empty
  WrongClassPolicy wrong;
  CHECK_THROWS_AS(simulate(rs, wrong, rs0, 1.0, 1), std::runtime_error);

  auto pol = fifo_policy();
  SimOptions tiny;
  tiny.event_cap = 10;
  CHECK_THROWS_WITH_AS(simulate(net, *pol, SimState::empty(net), 100.0, 1, tiny),
                       doctest::Contains("event budget"), std::runtime_error);
}

TEST_CASE("trace verifier flags tampering") {
  const auto net = fixtures::single_queue();
  auto pol = fifo_policy();
  SimOptions opt;
  opt.sample_dt = 10.0;
  auto tr = simulate(net, *pol, SimState::empty(net), 100.0, 2, opt);
  REQUIRE(verify_trace(net, tr).ok());

  auto tampered = tr;
  tampered.d_samples.back()[0] += 1;  // breaks the counting identity
  CHECK(!verify_trace(net, tampered).ok());

  tampered = tr;
  tampered.t_samples.back()[0] += 100.0;  // busy time beyond the window length
  CHECK(!verify_trace(net, tampered).ok());

  tampered = tr;
  // Claim the station never emptied while reporting idle windows.
  for (auto& w : tampered.window_min_station) w[0] = 1;
  CHECK(!verify_trace(net, tampered).ok());
}

TEST_CASE("builtin policy factory") {
  const auto net = fixtures::rybko_stolyar();
  CHECK(builtin_policy("fifo", net) != nullptr);
  CHECK(builtin_policy("priority", net) != nullptr);
  CHECK_THROWS_AS(builtin_policy("round-robin", net), std::invalid_argument);
  CHECK_THROWS_AS(static_priority_policy(net, {{0, 3}, {1}}), std::invalid_argument);
}

TEST_CASE("event log records ordered arrivals and departures") {
  const auto net = fixtures::single_queue_deterministic();
  auto pol = fifo_policy();
  SimOptions opt;
  opt.log_events = true;
  const auto tr = simulate(net, *pol, SimState::empty(net), 3.0, 1, opt);
  REQUIRE(tr.events.size() >= 4);
  CHECK(tr.events[0].kind == 'a');
  CHECK(tr.events[0].time == doctest::Approx(1.0));
  CHECK(tr.events[1].kind == 'd');
  CHECK(tr.events[1].time == doctest::Approx(1.5));
  for (size_t i = 1; i < tr.events.size(); ++i)
    CHECK(tr.events[i].time >= tr.events[i - 1].time);
  CHECK(!events_to_jsonl(tr).empty());
}
