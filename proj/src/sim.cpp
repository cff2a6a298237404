#include "fnet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace fnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Job {
  double station_arrival = 0.0;
  double network_entry = 0.0;
};

std::string arrival_label(int type) { return "arr:" + std::to_string(type); }
std::string service_label(const NetworkSpec& net, int c) {
  return "svc:" + std::to_string(net.class_type[c]) + ":" +
         std::to_string(net.class_stage[c]);
}

}  // namespace

SimState SimState::empty(const NetworkSpec& net) {
  SimState st;
  st.q.assign(net.class_count, 0);
  st.z1.assign(net.types.size(), -1.0);
  st.z2.assign(net.class_count, 0.0);
  st.in_service.assign(net.class_count, false);
  return st;
}

SimTrace simulate(const NetworkSpec& net, Policy& policy, const SimState& state0,
                  double horizon, std::uint64_t seed, const SimOptions& opt) {
  const int d = net.class_count;
  const int I = static_cast<int>(net.types.size());
  const int J = net.stations;
  if (!(horizon > 0)) throw std::invalid_argument("simulate: horizon must be positive");
  if (static_cast<int>(state0.q.size()) != d ||
      static_cast<int>(state0.z2.size()) != d ||
      static_cast<int>(state0.in_service.size()) != d ||
      static_cast<int>(state0.z1.size()) != I)
    throw std::invalid_argument("simulate: state dimension mismatch");
  for (long long v : state0.q)
    if (v < 0) throw std::invalid_argument("simulate: negative queue length");

  std::vector<Rng> arr_rng, svc_rng;
  arr_rng.reserve(I);
  for (int i = 0; i < I; ++i) arr_rng.push_back(Rng::stream(seed, arrival_label(i)));
  svc_rng.reserve(d);
  for (int c = 0; c < d; ++c) svc_rng.push_back(Rng::stream(seed, service_label(net, c)));

  SimState st = state0;
  std::vector<std::deque<Job>> jobs(d);
  for (int c = 0; c < d; ++c)
    for (long long k = 0; k < st.q[c]; ++k) jobs[c].push_back({0.0, 0.0});
  for (int i = 0; i < I; ++i)
    if (st.z1[i] < 0) st.z1[i] = net.types[i].arrival.sample(arr_rng[i]);
  for (int c = 0; c < d; ++c)
    if (st.in_service[c] && st.q[c] == 0)
      throw std::invalid_argument("simulate: in-service class with empty queue");

  std::vector<double> head_sa(d, kInf), head_ne(d, kInf);
  auto refresh_head = [&](int c) {
    if (jobs[c].empty()) {
      head_sa[c] = head_ne[c] = kInf;
    } else {
      head_sa[c] = jobs[c].front().station_arrival;
      head_ne[c] = jobs[c].front().network_entry;
    }
  };
  for (int c = 0; c < d; ++c) refresh_head(c);

  std::vector<long long> A(I, 0), D(d, 0);
  std::vector<double> T(d, 0.0);

  SimTrace tr;
  tr.seed = seed;
  tr.q0 = st.q;
  auto record_sample = [&](double time) {
    tr.sample_times.push_back(time);
    tr.q_samples.push_back(st.q);
    tr.a_samples.push_back(A);
    tr.d_samples.push_back(D);
    tr.t_samples.push_back(T);
  };
  record_sample(0.0);

  std::vector<long long> cur_min(J);
  auto station_total = [&](int s) {
    long long g = 0;
    for (int c : net.station_classes[s]) g += st.q[c];
    return g;
  };
  auto update_mins = [&] {
    for (int s = 0; s < J; ++s) cur_min[s] = std::min(cur_min[s], station_total(s));
  };
  for (int s = 0; s < J; ++s) cur_min[s] = station_total(s);

  auto log_event = [&](double time, char kind, int index) {
    if (opt.log_events && tr.events.size() < opt.event_log_cap)
      tr.events.push_back({time, kind, index});
  };

  double clock = 0.0;
  double next_sample = opt.sample_dt > 0 ? opt.sample_dt : horizon;
  PolicyContext ctx{net, st, head_sa, head_ne, clock};
  std::vector<int> serve(J, -1);

  while (clock < horizon - 1e-12) {
    // Decision points: one chosen class per station until the next event.
    ctx.clock = clock;
    for (int s = 0; s < J; ++s) {
      const int c = policy.choose(ctx, s);
      if (c < 0) {
        if (station_total(s) > 0)
          throw std::runtime_error("non-idling violation: station idles with work");
        serve[s] = -1;
        continue;
      }
      if (c >= d || net.station_of[c] != s || st.q[c] == 0)
        throw std::runtime_error("policy chose an invalid class");
      serve[s] = c;
      if (!st.in_service[c]) {
        st.z2[c] = net.service_dist(c).sample(svc_rng[c]);
        st.in_service[c] = true;
      }
    }

    double dt = horizon - clock;
    if (opt.sample_dt > 0) dt = std::min(dt, next_sample - clock);
    const double wake = policy.next_wakeup(clock);
    if (wake < kInf && wake > clock + 1e-15) dt = std::min(dt, wake - clock);
    for (int i = 0; i < I; ++i) dt = std::min(dt, st.z1[i]);
    for (int s = 0; s < J; ++s)
      if (serve[s] >= 0) dt = std::min(dt, st.z2[serve[s]]);
    if (dt < 0) dt = 0;

    for (int i = 0; i < I; ++i) st.z1[i] -= dt;
    for (int s = 0; s < J; ++s)
      if (serve[s] >= 0) {
        st.z2[serve[s]] -= dt;
        T[serve[s]] += dt;
        policy.note_service(serve[s], dt);
      }
    clock += dt;

    // Arrivals first, then completions, both in ascending index order.
    for (int i = 0; i < I; ++i)
      if (st.z1[i] <= 0.0) {
        if (++tr.event_count > opt.event_cap)
          throw std::runtime_error("event budget exceeded");
        const int c0 = net.cls(i, 0);
        ++A[i];
        ++st.q[c0];
        jobs[c0].push_back({clock, clock});
        refresh_head(c0);
        st.z1[i] = net.types[i].arrival.sample(arr_rng[i]);
        log_event(clock, 'a', i);
      }
    for (int s = 0; s < J; ++s) {
      const int c = serve[s];
      if (c >= 0 && st.z2[c] <= 0.0) {
        if (++tr.event_count > opt.event_cap)
          throw std::runtime_error("event budget exceeded");
        const Job done = jobs[c].front();
        jobs[c].pop_front();
        refresh_head(c);
        --st.q[c];
        ++D[c];
        st.in_service[c] = false;
        st.z2[c] = 0.0;
        if (!net.is_last_stage(c)) {
          const int cn = c + 1;
          ++st.q[cn];
          jobs[cn].push_back({clock, done.network_entry});
          refresh_head(cn);
        }
        log_event(clock, 'd', c);
      }
    }
    update_mins();

    if (opt.sample_dt > 0 && clock >= next_sample - 1e-9 && clock < horizon - 1e-12) {
      record_sample(next_sample);
      tr.window_min_station.push_back(cur_min);
      for (int s = 0; s < J; ++s) cur_min[s] = station_total(s);
      next_sample += opt.sample_dt;
    }
  }
  record_sample(horizon);
  tr.window_min_station.push_back(cur_min);
  if (opt.final_state) *opt.final_state = st;
  return tr;
}

namespace {

// Selects among nonempty classes of a station by a head-of-line timestamp.
class HeadSelectPolicy : public Policy {
 public:
  enum class Mode { fifo, lifo, gfifo };
  explicit HeadSelectPolicy(Mode mode) : mode_(mode) {}
  int choose(const PolicyContext& ctx, int station) override {
    int best = -1;
    double best_key = 0.0;
    for (int c : ctx.net.station_classes[station]) {
      if (ctx.state.q[c] == 0) continue;
      const double key = mode_ == Mode::gfifo ? ctx.head_network_entry[c]
                                              : ctx.head_station_arrival[c];
      const bool better = best < 0 || (mode_ == Mode::lifo ? key > best_key
                                                           : key < best_key);
      if (better) {
        best = c;
        best_key = key;
      }
    }
    return best;
  }

 private:
  Mode mode_;
};

class StaticPriorityPolicy : public Policy {
 public:
  explicit StaticPriorityPolicy(std::vector<std::vector<int>> order)
      : order_(std::move(order)) {}
  int choose(const PolicyContext& ctx, int station) override {
    for (int c : order_[station])
      if (ctx.state.q[c] > 0) return c;
    return -1;
  }

 private:
  std::vector<std::vector<int>> order_;
};

}  // namespace

std::unique_ptr<Policy> fifo_policy() {
  return std::make_unique<HeadSelectPolicy>(HeadSelectPolicy::Mode::fifo);
}
std::unique_ptr<Policy> lifo_policy() {
  return std::make_unique<HeadSelectPolicy>(HeadSelectPolicy::Mode::lifo);
}
std::unique_ptr<Policy> gfifo_policy() {
  return std::make_unique<HeadSelectPolicy>(HeadSelectPolicy::Mode::gfifo);
}

std::unique_ptr<Policy> static_priority_policy(const NetworkSpec& net,
                                               std::vector<std::vector<int>> order) {
  if (static_cast<int>(order.size()) != net.stations)
    throw std::invalid_argument("static_priority: order must cover every station");
  for (int s = 0; s < net.stations; ++s) {
    std::set<int> seen(order[s].begin(), order[s].end());
    std::set<int> need(net.station_classes[s].begin(), net.station_classes[s].end());
    if (seen != need)
      throw std::invalid_argument(
          "static_priority: order must list each station's classes exactly once");
  }
  return std::make_unique<StaticPriorityPolicy>(std::move(order));
}

std::unique_ptr<Policy> builtin_policy(const std::string& kind, const NetworkSpec& net) {
  if (kind == "fifo") return fifo_policy();
  if (kind == "lifo") return lifo_policy();
  if (kind == "gfifo") return gfifo_policy();
  if (kind == "priority") return static_priority_policy(net, net.station_classes);
  throw std::invalid_argument("unknown policy kind: " + kind);
}

ValidationReport verify_trace(const NetworkSpec& net, const SimTrace& trace) {
  ValidationReport rep;
  auto add = [&rep](const std::string& m) { rep.violations.push_back(m); };
  const int d = net.class_count;
  const int I = static_cast<int>(net.types.size());
  const size_t K = trace.sample_times.size();
  if (K == 0 || trace.q_samples.size() != K || trace.a_samples.size() != K ||
      trace.d_samples.size() != K || trace.t_samples.size() != K ||
      trace.window_min_station.size() + 1 != K) {
    add("trace structure: sample arrays are inconsistent");
    return rep;
  }
  constexpr double kTol = 1e-9;
  for (size_t k = 0; k < K; ++k) {
    const auto& q = trace.q_samples[k];
    const auto& a = trace.a_samples[k];
    const auto& dd = trace.d_samples[k];
    if (static_cast<int>(q.size()) != d || static_cast<int>(a.size()) != I ||
        static_cast<int>(dd.size()) != d) {
      add("trace structure: row dimension mismatch");
      return rep;
    }
    for (int c = 0; c < d; ++c) {
      if (q[c] < 0) add("negative queue length in sample");
      const long long inflow =
          net.class_stage[c] == 0 ? a[net.class_type[c]] : dd[c - 1];
      if (q[c] != trace.q0[c] + inflow - dd[c]) {
        add("flow conservation identity fails at sample " + std::to_string(k));
        break;
      }
    }
  }
  for (size_t k = 0; k + 1 < K; ++k) {
    const double dt = trace.sample_times[k + 1] - trace.sample_times[k];
    if (dt < -kTol) add("sample times not increasing");
    for (int s = 0; s < net.stations; ++s) {
      double busy = 0.0;
      for (int c : net.station_classes[s]) {
        const double inc = trace.t_samples[k + 1][c] - trace.t_samples[k][c];
        if (inc < -kTol) add("busy time decreases for a class");
        busy += inc;
      }
      if (busy > dt + kTol)
        add("station busy time exceeds window length at window " + std::to_string(k));
      if (trace.window_min_station[k][s] >= 1 && busy < dt - kTol)
        add("work conservation fails: station idle while its queue stayed positive "
            "in window " + std::to_string(k));
    }
  }
  return rep;
}

std::string trace_to_csv(const NetworkSpec& net, const SimTrace& trace) {
  const int d = net.class_count;
  const int I = static_cast<int>(net.types.size());
  std::string out = "time";
  for (int c = 0; c < d; ++c) out += ",q_" + std::to_string(c);
  for (int i = 0; i < I; ++i) out += ",A_" + std::to_string(i);
  for (int c = 0; c < d; ++c) out += ",D_" + std::to_string(c);
  for (int c = 0; c < d; ++c) out += ",T_" + std::to_string(c);
  out += "\n";
  char buf[64];
  for (size_t k = 0; k < trace.sample_times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", trace.sample_times[k]);
    out += buf;
    for (int c = 0; c < d; ++c) out += "," + std::to_string(trace.q_samples[k][c]);
    for (int i = 0; i < I; ++i) out += "," + std::to_string(trace.a_samples[k][i]);
    for (int c = 0; c < d; ++c) out += "," + std::to_string(trace.d_samples[k][c]);
    for (int c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", trace.t_samples[k][c]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::string events_to_jsonl(const SimTrace& trace) {
  std::string out;
  for (const auto& e : trace.events) {
    nlohmann::json j{{"time", e.time},
                     {"kind", e.kind == 'a' ? "arrival" : "departure"},
                     {"index", e.index}};
    out += j.dump();
    out += "\n";
  }
  return out;
}

}  // namespace fnet
