#include "fnet/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double norm1_int(const std::vector<long long>& v) {
  double s = 0.0;
  for (long long x : v) s += static_cast<double>(x);
  return s;
}

// First time the piecewise-linear total queue reaches the level, or -1.
double first_reach(const FluidSolution& sol, double level) {
  double prev = norm1(sol.q.front());
  if (prev >= level) return sol.times.front();
  for (size_t k = 1; k < sol.points(); ++k) {
    const double cur = norm1(sol.q[k]);
    if (cur >= level) {
      const double du = sol.times[k] - sol.times[k - 1];
      if (du <= 0 || cur == prev) return sol.times[k];
      return sol.times[k - 1] + du * (level - prev) / (cur - prev);
    }
    prev = cur;
  }
  return -1.0;
}

}  // namespace

double delta_default(const Constants& cons, int segments, double gamma, double theta,
                     long long practical_cap, double* log10_strict, bool* from_strict) {
  if (segments < 1 || !(gamma > 0))
    throw std::invalid_argument("delta_default: need segments >= 1 and gamma > 0");
  const double lg = -std::log10(12.0) - (segments + 3) * std::log10(cons.c_big) +
                    std::log10(std::min(gamma / cons.c_big, 1.0));
  if (log10_strict) *log10_strict = lg;
  const double strict = std::pow(10.0, lg);  // underflows to 0 for large M
  const double practical = theta / static_cast<double>(practical_cap);
  if (from_strict) *from_strict = strict >= practical;
  return std::max(strict, practical);
}

AllocationPlan build_allocation_plan(const NetworkSpec& net, const Witness& w,
                                     const std::vector<double>& q,
                                     double delta_override, long long practical_cap) {
  AllocationPlan plan;
  plan.n = norm1(q);
  if (plan.n < 1.0)
    throw std::invalid_argument("build_allocation_plan: total mass must be at least 1");
  if (practical_cap < 1)
    throw std::invalid_argument("build_allocation_plan: practical_cap must be positive");

  const auto cert = gamma_of_witness(net, w, plan.n);
  plan.gamma = cert.gamma;
  plan.theta_strict = std::max(1.0, 3.0 / cert.gamma);

  // Grow the planned solution until its mass triples.
  const double level = 3.0 * plan.n;
  double horizon = std::max(1.0, 16.0 * plan.n);
  double tstar = -1.0;
  FluidSolution divergent;
  for (int it = 0; it < 16 && tstar < 0; ++it) {
    divergent = build_divergent(net, w, q, horizon);
    tstar = first_reach(divergent, level);
    horizon *= 2.0;
  }
  if (tstar <= 0)
    throw std::runtime_error("build_allocation_plan: planned mass never triples");

  const auto dec = fdp_decompose(net, restrict_solution(divergent, 0.0, tstar));
  plan.segments = static_cast<int>(dec.cut_times.size()) - 1;
  plan.cut_times = dec.cut_times;
  plan.fluid = dec.modified;
  plan.theta0 = tstar;
  plan.theta = tstar / plan.n;
  plan.target_norm = total_queue(plan.fluid, tstar);

  const auto cons = derived_constants(net);
  const double def = delta_default(cons, plan.segments, plan.gamma, plan.theta,
                                   practical_cap, &plan.delta_strict_log10,
                                   &plan.delta_from_strict);
  plan.delta_strict = std::pow(10.0, plan.delta_strict_log10);
  plan.delta = delta_override > 0 ? delta_override : def;
  if (delta_override > 0) plan.delta_from_strict = false;

  const double spacing = plan.delta * plan.n;
  const long long count =
      std::max<long long>(1, static_cast<long long>(std::ceil(plan.theta0 / spacing - 1e-9)));
  if (count > practical_cap + 1)
    throw std::invalid_argument("build_allocation_plan: grid exceeds the practical cap");
  plan.grid.reserve(count + 1);
  for (long long m = 0; m < count; ++m) plan.grid.push_back(m * spacing);
  plan.grid.push_back(plan.theta0);
  if (plan.grid.size() >= 2 &&
      plan.grid.back() - plan.grid[plan.grid.size() - 2] < 1e-9 * plan.theta0)
    plan.grid.erase(plan.grid.end() - 2);

  plan.serve_order = net.station_classes;
  const int d = net.class_count;
  plan.allocations.resize(plan.grid.size() - 1);
  auto prev = plan.fluid.t_at(plan.grid.front());
  for (size_t m = 0; m + 1 < plan.grid.size(); ++m) {
    auto next = plan.fluid.t_at(plan.grid[m + 1]);
    plan.allocations[m].resize(d);
    for (int c = 0; c < d; ++c)
      plan.allocations[m][c] = std::max(0.0, next[c] - prev[c]);
    prev = std::move(next);
  }
  return plan;
}

namespace {

class TrackerPolicy : public Policy {
 public:
  explicit TrackerPolicy(std::shared_ptr<const AllocationPlan> plan)
      : plan_(std::move(plan)),
        spent_(plan_->allocations.empty() ? 0 : plan_->allocations[0].size(), 0.0),
        chosen_(plan_->serve_order.size(), -1),
        nominal_(plan_->serve_order.size(), 0) {}

  int choose(const PolicyContext& ctx, int station) override {
    advance_interval(ctx.clock);
    nominal_[station] = 0;
    chosen_[station] = -1;
    if (m_ + 1 < plan_->grid.size()) {
      for (int c : plan_->serve_order[station])
        if (ctx.state.q[c] > 0 && spent_[c] < plan_->allocations[m_][c] - 1e-12) {
          chosen_[station] = c;
          nominal_[station] = 1;
          return c;
        }
    }
    for (int c : plan_->serve_order[station])
      if (ctx.state.q[c] > 0) {
        chosen_[station] = c;
        return c;
      }
    return -1;
  }

  double next_wakeup(double clock) const override {
    if (m_ + 1 >= plan_->grid.size()) return kInf;
    double wake = plan_->grid[m_ + 1];
    for (size_t s = 0; s < nominal_.size(); ++s)
      if (nominal_[s]) {
        const int c = chosen_[s];
        wake = std::min(wake, clock + (plan_->allocations[m_][c] - spent_[c]));
      }
    return wake;
  }

  void note_service(int cls, double dt) override { spent_[cls] += dt; }

 private:
  void advance_interval(double clock) {
    while (m_ + 1 < plan_->grid.size() && clock >= plan_->grid[m_ + 1] - 1e-12) {
      ++m_;
      std::fill(spent_.begin(), spent_.end(), 0.0);
    }
  }

  std::shared_ptr<const AllocationPlan> plan_;
  std::size_t m_ = 0;
  std::vector<double> spent_;
  std::vector<int> chosen_;
  std::vector<char> nominal_;
};

void append_trace(SimTrace& acc, const SimTrace& tr, double offset) {
  if (acc.sample_times.empty()) {
    acc = tr;
    return;
  }
  const auto a0 = acc.a_samples.back();
  const auto d0 = acc.d_samples.back();
  const auto t0 = acc.t_samples.back();
  for (size_t k = 1; k < tr.sample_times.size(); ++k) {
    acc.sample_times.push_back(tr.sample_times[k] + offset);
    acc.q_samples.push_back(tr.q_samples[k]);
    auto a = tr.a_samples[k];
    for (size_t i = 0; i < a.size(); ++i) a[i] += a0[i];
    acc.a_samples.push_back(std::move(a));
    auto dd = tr.d_samples[k];
    for (size_t i = 0; i < dd.size(); ++i) dd[i] += d0[i];
    acc.d_samples.push_back(std::move(dd));
    auto tt = tr.t_samples[k];
    for (size_t i = 0; i < tt.size(); ++i) tt[i] += t0[i];
    acc.t_samples.push_back(std::move(tt));
  }
  for (const auto& w : tr.window_min_station) acc.window_min_station.push_back(w);
  for (auto e : tr.events) {
    e.time += offset;
    acc.events.push_back(e);
  }
  acc.event_count += tr.event_count;
}

double min_sampled_total(const SimTrace& tr) {
  double lo = kInf;
  for (const auto& row : tr.q_samples) lo = std::min(lo, norm1_int(row));
  return lo;
}

}  // namespace

std::unique_ptr<Policy> tracker_policy(std::shared_ptr<const AllocationPlan> plan) {
  if (!plan || plan->grid.size() < 2)
    throw std::invalid_argument("tracker_policy: empty plan");
  return std::make_unique<TrackerPolicy>(std::move(plan));
}

SimTrace supervisor_run(const NetworkSpec& net, const Witness& w, const SimState& state0,
                        const SupervisorConfig& cfg, double horizon, std::uint64_t seed,
                        EpochLog* log) {
  if (!(cfg.n0 >= 1) || !(cfg.growth_factor > 1) || cfg.max_epochs < 1)
    throw std::invalid_argument("supervisor_run: invalid configuration");
  const auto cons = derived_constants(net);
  const auto cert = gamma_of_witness(net, w);
  EpochLog lg;
  lg.gamma = cert.gamma;
  lg.theta_strict = std::max(1.0, 3.0 / cert.gamma);

  SimTrace acc;
  SimState st = state0;
  double clock = 0.0;
  bool in_fallback = false;
  for (int epoch = 0; epoch < cfg.max_epochs && clock < horizon - 1e-9; ++epoch) {
    const double n = norm1_int(st.q);
    bool fallback = in_fallback || n < 1.0;
    std::unique_ptr<Policy> pol;
    std::shared_ptr<AllocationPlan> plan;
    double dur = 0.0;
    if (!fallback) {
      // An unplannable state (for example a network outside the planner's
      // two-station scope) degrades to the fallback instead of aborting.
      try {
        std::vector<double> qf(st.q.begin(), st.q.end());
        plan = std::make_shared<AllocationPlan>(
            build_allocation_plan(net, w, qf, cfg.delta_override, cfg.practical_cap));
        pol = tracker_policy(plan);
        dur = std::min(plan->theta0, horizon - clock);
      } catch (const std::exception&) {
        fallback = true;
      }
    }
    if (fallback) {
      pol = static_priority_policy(net, net.station_classes);
      dur = std::min(std::max(10.0, cfg.n0), horizon - clock);
    }

    SimOptions opt;
    opt.sample_dt = cfg.sample_dt;
    SimState end_state;
    opt.final_state = &end_state;
    const std::uint64_t eseed = seed ^ Rng::hash_label("epoch:" + std::to_string(epoch));
    const auto tr = simulate(net, *pol, st, dur, eseed, opt);

    EpochRecord rec;
    rec.start_time = clock;
    rec.end_time = clock + dur;
    rec.start_norm = n;
    rec.end_norm = norm1_int(tr.q_samples.back());
    rec.trough = min_sampled_total(tr);
    rec.used_fallback = fallback;
    if (fallback) {
      in_fallback = rec.end_norm < cfg.n0;
    } else {
      rec.theta_used = dur / n;
      rec.delta_used = plan->delta;
      rec.doubled = dur >= plan->theta0 - 1e-9 &&
                    rec.end_norm >= cfg.growth_factor * n - 1e-9;
      const double floor = (n / 4.0) * std::min(cert.gamma / cons.c_big, 1.0);
      rec.trough_ok = rec.trough >= floor - 1e-9;
      in_fallback = !(rec.doubled && rec.trough_ok);
    }
    lg.epochs.push_back(rec);
    append_trace(acc, tr, clock);
    clock += dur;
    st = end_state;
  }
  if (log) *log = std::move(lg);
  return acc;
}

bool epoch_induction_holds(const EpochLog& log) {
  double theta_max = 0.0;
  for (const auto& e : log.epochs) {
    if (e.used_fallback || !e.doubled) break;
    theta_max = std::max(theta_max, e.theta_used);
    if (theta_max <= 0) return false;
    if (e.end_norm + 1e-9 < e.end_time / theta_max) return false;
  }
  return true;
}

}  // namespace fnet
