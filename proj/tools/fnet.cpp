// Command-line umbrella for the network library. Exit codes: 0 = pass,
// 2 = a verifier reported a violation, 3 = bad input or usage.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fnet/analysis.hpp"
#include "fnet/divergence.hpp"
#include "fnet/fdp.hpp"
#include "fnet/fixtures.hpp"
#include "fnet/fluid.hpp"
#include "fnet/ld.hpp"
#include "fnet/network.hpp"
#include "fnet/sim.hpp"
#include "fnet/tracker.hpp"

namespace {

using nlohmann::json;

constexpr int kPass = 0;
constexpr int kViolation = 2;
constexpr int kInputError = 3;

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t used = 0;
    out.push_back(std::stod(tok, &used));
    if (used != tok.size()) throw std::invalid_argument("bad number: " + tok);
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

// "0,3;1,2" -> per-station class orders.
std::vector<std::vector<int>> parse_orders(const std::string& text) {
  std::vector<std::vector<int>> out;
  std::stringstream ss(text);
  std::string grp;
  while (std::getline(ss, grp, ';')) {
    std::vector<int> row;
    std::stringstream gs(grp);
    std::string tok;
    while (std::getline(gs, tok, ',')) row.push_back(std::stoi(tok));
    out.push_back(std::move(row));
  }
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open output file: " + path);
  f << text;
}

fnet::NetworkSpec load_net(const std::string& path) {
  auto net = fnet::load_network_file(path);
  const auto rep = fnet::validate_network(net);
  if (!rep.ok()) {
    std::string msg = "invalid network:";
    for (const auto& v : rep.violations) msg += "\n  " + v;
    throw std::invalid_argument(msg);
  }
  return net;
}

fnet::Witness load_witness(const fnet::NetworkSpec& net, const std::string& path,
                           bool builtin_rs) {
  if (builtin_rs) return fnet::Witness{fnet::fixtures::rs_witness()};
  if (path.empty())
    throw std::invalid_argument("need --witness FILE or --rs-witness");
  fnet::Witness w{fnet::load_fluid_file(path)};
  fnet::check_witness(net, w);
  return w;
}

json violations_json(const fnet::ValidationReport& rep) {
  json arr = json::array();
  for (const auto& v : rep.violations) arr.push_back(v);
  return arr;
}

json fluid_report_json(const fnet::FluidReport& rep) {
  json arr = json::array();
  for (const auto& v : rep.violations)
    arr.push_back({{"kind", v.kind},
                   {"segment", v.segment},
                   {"index", v.index},
                   {"magnitude", v.magnitude}});
  return arr;
}

// ---------------------------------------------------------------- sim run

int cmd_sim_run(const std::string& net_path, const std::string& policy,
                const std::string& q0, double horizon, std::uint64_t seed,
                double sample_dt, bool log_events, const std::string& out,
                const std::string& events_out) {
  const auto net = load_net(net_path);
  auto pol = fnet::builtin_policy(policy, net);
  auto st = fnet::SimState::empty(net);
  if (!q0.empty()) {
    const auto q = parse_doubles(q0);
    if (static_cast<int>(q.size()) != net.class_count)
      throw std::invalid_argument("--q length must equal the class count");
    for (size_t c = 0; c < q.size(); ++c) st.q[c] = static_cast<long long>(q[c]);
  }
  fnet::SimOptions opt;
  opt.sample_dt = sample_dt;
  opt.log_events = log_events || !events_out.empty();
  const auto tr = fnet::simulate(net, *pol, st, horizon, seed, opt);
  write_output(out, fnet::trace_to_csv(net, tr));
  if (!events_out.empty()) write_output(events_out, fnet::events_to_jsonl(tr));

  const auto rep = fnet::verify_trace(net, tr);
  json summary = {{"events", tr.event_count},
                  {"samples", tr.sample_times.size()},
                  {"verified", rep.ok()},
                  {"violations", violations_json(rep)}};
  std::cerr << summary.dump(2) << '\n';
  return rep.ok() ? kPass : kViolation;
}

// ---------------------------------------------------------------- fluid

int cmd_fluid_simulate(const std::string& net_path, const std::string& q0,
                       double horizon, const std::string& priority,
                       const std::string& out) {
  const auto net = load_net(net_path);
  const auto q = q0.empty() ? std::vector<double>(net.class_count, 0.0)
                            : parse_doubles(q0);
  const auto order =
      priority.empty() ? net.station_classes : parse_orders(priority);
  const auto sol = fnet::simulate_priority_fluid(net, order, q, horizon);
  write_output(out, fnet::fluid_to_json(net, sol));
  return kPass;
}

int cmd_fluid_check(const std::string& net_path, const std::string& sol_path,
                    double tol) {
  const auto net = load_net(net_path);
  const auto sol = fnet::load_fluid_file(sol_path);
  const auto feas = fnet::validate_fluid_solution(net, sol, tol);
  const auto busy = fnet::check_non_idling(net, sol, tol);
  json rep = {{"feasible", feas.ok()},
              {"non_idling", busy.ok()},
              {"feasibility_violations", fluid_report_json(feas)},
              {"non_idling_violations", fluid_report_json(busy)}};
  std::cout << rep.dump(2) << '\n';
  return feas.ok() && busy.ok() ? kPass : kViolation;
}

// ---------------------------------------------------------------- fdp

int cmd_fdp_decompose(const std::string& net_path, const std::string& sol_path,
                      const std::string& out) {
  const auto net = load_net(net_path);
  const auto sol = fnet::load_fluid_file(sol_path);
  const auto dec = fnet::fdp_decompose(net, sol);
  write_output(out, fnet::decomposition_to_json(net, dec));
  const auto rep = fnet::fdp_bound_check(net, sol, dec);
  json summary = {{"segments", dec.cut_times.size() - 1},
                  {"bounds_ok", rep.ok()},
                  {"violations", violations_json(rep)}};
  std::cerr << summary.dump(2) << '\n';
  return rep.ok() ? kPass : kViolation;
}

// ---------------------------------------------------------------- divergent

int cmd_divergent_build(const std::string& net_path, const std::string& witness,
                        bool rs, const std::string& q0, double horizon,
                        const std::string& out) {
  const auto net = load_net(net_path);
  const auto w = load_witness(net, witness, rs);
  const auto q = q0.empty() ? std::vector<double>(net.class_count, 0.0)
                            : parse_doubles(q0);
  if (static_cast<int>(q.size()) != net.class_count)
    throw std::invalid_argument("--q length must equal the class count");
  double n = 0.0;
  for (double x : q) n += x;
  const auto sol = fnet::build_divergent(net, w, q, horizon);
  write_output(out, fnet::fluid_to_json(net, sol));

  const auto cert = fnet::gamma_of_witness(net, w, n);
  const bool diverges = fnet::verify_linear_divergence(sol, cert.gamma, 1e-9);
  json summary = {{"gamma1", cert.gamma1},
                  {"gamma0", cert.gamma0},
                  {"gamma", cert.gamma},
                  {"floor_bound", cert.floor_bound},
                  {"linear_divergence_verified", diverges}};
  std::cerr << summary.dump(2) << '\n';
  return diverges ? kPass : kViolation;
}

// ---------------------------------------------------------------- attack

int cmd_attack_run(const std::string& net_path, const std::string& witness,
                   bool rs, double n, int seeds, std::uint64_t seed_base,
                   int max_epochs, double horizon, const std::string& out) {
  const auto net = load_net(net_path);
  const auto w = load_witness(net, witness, rs);
  auto st0 = fnet::SimState::empty(net);
  {
    // Spread the initial mass evenly over the classes, remainder to the first.
    const int d = net.class_count;
    const long long total = static_cast<long long>(n);
    const long long each = total / d;
    for (int c = 0; c < d; ++c) st0.q[c] = each;
    st0.q[0] += total - each * d;
  }
  fnet::SupervisorConfig cfg;
  cfg.max_epochs = max_epochs;

  json rows = json::array();
  int doubled1 = 0, induction_ok = 0, verified = 0;
  std::vector<double> divs;
  for (int s = 0; s < seeds; ++s) {
    fnet::EpochLog log;
    const auto tr =
        fnet::supervisor_run(net, w, st0, cfg, horizon, seed_base + s, &log);
    const bool ok = fnet::verify_trace(net, tr).ok();
    const bool d1 = !log.epochs.empty() && log.epochs.front().doubled;
    const bool ind = fnet::epoch_induction_holds(log);
    const double div = fnet::divergence_estimate(tr);
    verified += ok;
    doubled1 += d1;
    induction_ok += ind;
    divs.push_back(div);
    json epochs = json::array();
    for (const auto& e : log.epochs)
      epochs.push_back({{"start_norm", e.start_norm},
                        {"end_norm", e.end_norm},
                        {"trough", e.trough},
                        {"doubled", e.doubled},
                        {"trough_ok", e.trough_ok},
                        {"fallback", e.used_fallback}});
    rows.push_back({{"seed", seed_base + s},
                    {"trace_verified", ok},
                    {"epoch1_doubled", d1},
                    {"induction", ind},
                    {"divergence", div},
                    {"epochs", std::move(epochs)}});
  }
  std::sort(divs.begin(), divs.end());
  json rep = {{"seeds", seeds},
              {"epoch1_doubling_fraction", static_cast<double>(doubled1) / seeds},
              {"divergence_p5", divs[static_cast<size_t>(0.05 * (seeds - 1))]},
              {"induction_ok", induction_ok},
              {"traces_verified", verified},
              {"runs", std::move(rows)}};
  write_output(out, rep.dump(2));
  return verified == seeds && induction_ok == seeds ? kPass : kViolation;
}

// ---------------------------------------------------------------- ld

fnet::DistSpec dist_from_args(const std::string& family,
                              const std::string& params) {
  fnet::DistSpec d;
  d.family = fnet::dist_family_from_name(family);
  d.params = parse_doubles(params);
  if (!d.well_formed())
    throw std::invalid_argument("malformed distribution parameters");
  return d;
}

int cmd_ld_rate(const std::string& family, const std::string& params,
                double eps, const std::string& dir) {
  const auto d = dist_from_args(family, params);
  const auto t = dir == "lower" ? fnet::TailDirection::lower
                                : fnet::TailDirection::upper;
  const auto r = fnet::chernoff_rate(d, eps, t);
  const auto cert = fnet::check_exptail(d);
  json rep = {{"family", d.family_name()},
              {"mean", d.mean()},
              {"epsilon", eps},
              {"direction", dir},
              {"L", r.L},
              {"theta_star", r.theta_star},
              {"V", r.V},
              {"theta_sup", cert.theta_sup}};
  std::cout << rep.dump(2) << '\n';
  return kPass;
}

int cmd_ld_verify(const std::string& family, const std::string& params,
                  double eps, int n, double z, int trials, std::uint64_t seed) {
  const auto d = dist_from_args(family, params);
  const auto up = fnet::chernoff_rate(d, eps, fnet::TailDirection::upper);
  const auto lo = fnet::chernoff_rate(d, eps, fnet::TailDirection::lower);
  const double L = std::min(up.L, lo.L);
  const double V = std::max(up.V, lo.V);
  const double freq = fnet::empirical_ld_time(d, eps, n, z, trials, seed);
  const double bound = L == std::numeric_limits<double>::infinity()
                           ? 0.0
                           : 2.0 * V * std::exp(-L * n);
  const double sigma =
      3.0 * std::sqrt(std::max(bound, 1.0 / trials) / trials);
  const bool ok = freq <= bound + sigma;
  json rep = {{"frequency", freq},
              {"bound", bound},
              {"slack", sigma},
              {"L", L},
              {"V", V},
              {"n", n},
              {"trials", trials},
              {"pass", ok}};
  std::cout << rep.dump(2) << '\n';
  return ok ? kPass : kViolation;
}

int cmd_ld_network(const std::string& net_path, double eps) {
  const auto net = load_net(net_path);
  const auto r = fnet::network_ld(net, eps);
  json rep = {{"L", r.L}, {"V", r.V}, {"aggregated", r.aggregated}};
  std::cout << rep.dump(2) << '\n';
  return kPass;
}

// ---------------------------------------------------------------- report

int cmd_report_stability(const std::string& net_path, const std::string& policy,
                         double horizon, int seeds, std::uint64_t seed_base,
                         double sample_dt, double tol, const std::string& out) {
  const auto net = load_net(net_path);
  std::vector<fnet::SimTrace> traces;
  fnet::SimOptions opt;
  opt.sample_dt = sample_dt > 0 ? sample_dt : horizon / 20.0;
  for (int s = 0; s < seeds; ++s) {
    auto pol = fnet::builtin_policy(policy, net);
    traces.push_back(fnet::simulate(net, *pol, fnet::SimState::empty(net),
                                    horizon, seed_base + s, opt));
  }
  const auto rep = fnet::rate_stability_estimate(net, traces, tol);
  json types = json::array();
  for (const auto& t : rep.types)
    types.push_back({{"lambda", t.lambda},
                     {"throughput", t.throughput},
                     {"gap", t.gap}});
  json body = {{"types", std::move(types)},
               {"q_over_t", rep.q_over_t},
               {"tol", rep.tol},
               {"rate_stable_evidence", rep.rate_stable_evidence},
               {"sublinear_evidence", rep.sublinear_evidence},
               {"divergence_p5", rep.divergence_p5}};
  write_output(out, body.dump(2));
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiclass queueing network toolkit"};
  app.require_subcommand(1);

  // --- sim ---
  auto* sim = app.add_subcommand("sim", "stochastic discrete-event simulation");
  sim->require_subcommand(1);
  auto* sim_run = sim->add_subcommand("run", "run one seeded simulation");
  std::string sr_net, sr_policy = "fifo", sr_q, sr_out, sr_events_out;
  double sr_horizon = 100.0, sr_dt = 0.0;
  std::uint64_t sr_seed = 1;
  bool sr_events = false;
  sim_run->add_option("net", sr_net, "network spec JSON")->required();
  sim_run->add_option("--policy", sr_policy, "fifo|lifo|gfifo|priority");
  sim_run->add_option("--q", sr_q, "initial queue vector, comma separated");
  sim_run->add_option("--horizon", sr_horizon, "time horizon")->required();
  sim_run->add_option("--seed", sr_seed, "master seed");
  sim_run->add_option("--sample-dt", sr_dt, "sampling interval (0 = ends only)");
  sim_run->add_flag("--events", sr_events, "record the event log");
  sim_run->add_option("-o,--out", sr_out, "trace CSV path (default stdout)");
  sim_run->add_option("--events-out", sr_events_out, "event log JSONL path");

  // --- fluid ---
  auto* fluid = app.add_subcommand("fluid", "piecewise-linear fluid solutions");
  fluid->require_subcommand(1);
  auto* fl_sim = fluid->add_subcommand("simulate", "integrate static-priority dynamics");
  std::string fs_net, fs_q, fs_prio, fs_out;
  double fs_horizon = 1.0;
  fl_sim->add_option("net", fs_net, "network spec JSON")->required();
  fl_sim->add_option("--q", fs_q, "initial fluid levels, comma separated");
  fl_sim->add_option("--horizon", fs_horizon, "time horizon")->required();
  fl_sim->add_option("--priority", fs_prio,
                     "per-station class orders, e.g. \"3,0;1,2\"");
  fl_sim->add_option("-o,--out", fs_out, "solution JSON path (default stdout)");
  auto* fl_check = fluid->add_subcommand("check", "verify a fluid solution file");
  std::string fc_net, fc_sol;
  double fc_tol = 1e-9;
  fl_check->add_option("net", fc_net, "network spec JSON")->required();
  fl_check->add_option("solution", fc_sol, "fluid solution JSON")->required();
  fl_check->add_option("--tol", fc_tol, "check tolerance");

  // --- fdp ---
  auto* fdp = app.add_subcommand("fdp", "two-station segment decomposition");
  fdp->require_subcommand(1);
  auto* fdp_dec = fdp->add_subcommand("decompose", "decompose a fluid solution");
  std::string fd_net, fd_sol, fd_out;
  fdp_dec->add_option("net", fd_net, "network spec JSON")->required();
  fdp_dec->add_option("solution", fd_sol, "fluid solution JSON")->required();
  fdp_dec->add_option("-o,--out", fd_out, "decomposition JSON path (default stdout)");

  // --- divergent ---
  auto* dvg = app.add_subcommand("divergent", "linearly divergent fluid solutions");
  dvg->require_subcommand(1);
  auto* dvg_build = dvg->add_subcommand("build", "grow a divergent solution");
  std::string db_net, db_witness, db_q, db_out;
  double db_horizon = 16.0;
  bool db_rs = false;
  dvg_build->add_option("net", db_net, "network spec JSON")->required();
  dvg_build->add_option("--witness", db_witness, "witness fluid solution JSON");
  dvg_build->add_flag("--rs-witness", db_rs, "use the builtin crossover witness");
  dvg_build->add_option("--q", db_q, "initial fluid levels, comma separated");
  dvg_build->add_option("--horizon", db_horizon, "time horizon");
  dvg_build->add_option("-o,--out", db_out, "solution JSON path (default stdout)");

  // --- attack ---
  auto* atk = app.add_subcommand("attack", "fluid-tracking policy with restarts");
  atk->require_subcommand(1);
  auto* atk_run = atk->add_subcommand("run", "supervised multi-seed attack runs");
  std::string ar_net, ar_witness, ar_out;
  double ar_n = 200.0, ar_horizon = 1e9;
  int ar_seeds = 20, ar_epochs = 4;
  std::uint64_t ar_base = 424242;
  bool ar_rs = false;
  atk_run->add_option("net", ar_net, "network spec JSON")->required();
  atk_run->add_option("--witness", ar_witness, "witness fluid solution JSON");
  atk_run->add_flag("--rs-witness", ar_rs, "use the builtin crossover witness");
  atk_run->add_option("--n", ar_n, "initial total queue mass");
  atk_run->add_option("--seeds", ar_seeds, "seed count");
  atk_run->add_option("--seed-base", ar_base, "first seed");
  atk_run->add_option("--epochs", ar_epochs, "max supervised epochs");
  atk_run->add_option("--horizon", ar_horizon, "overall time cap");
  atk_run->add_option("-o,--out", ar_out, "report JSON path (default stdout)");

  // --- ld ---
  auto* ld = app.add_subcommand("ld", "large-deviations primitives");
  ld->require_subcommand(1);
  auto* ld_rate = ld->add_subcommand("rate", "optimal exponential rate");
  std::string lr_family = "exponential", lr_params = "1", lr_dir = "upper";
  double lr_eps = 0.5;
  ld_rate->add_option("--family", lr_family,
                      "exponential|erlang|deterministic|uniform-bounded");
  ld_rate->add_option("--params", lr_params, "family parameters, comma separated");
  ld_rate->add_option("--eps", lr_eps, "deviation from the mean")->required();
  ld_rate->add_option("--dir", lr_dir, "upper|lower");
  auto* ld_verify = ld->add_subcommand("verify", "Monte-Carlo tail frequency check");
  std::string lv_family = "exponential", lv_params = "1";
  double lv_eps = 0.3, lv_z = 0.0;
  int lv_n = 100, lv_trials = 100000;
  std::uint64_t lv_seed = 1;
  ld_verify->add_option("--family", lv_family, "distribution family");
  ld_verify->add_option("--params", lv_params, "family parameters");
  ld_verify->add_option("--eps", lv_eps, "deviation from the mean")->required();
  ld_verify->add_option("--n", lv_n, "partial-sum length");
  ld_verify->add_option("--z", lv_z, "residual conditioning level");
  ld_verify->add_option("--trials", lv_trials, "Monte-Carlo trials");
  ld_verify->add_option("--seed", lv_seed, "RNG seed");
  auto* ld_net = ld->add_subcommand("network", "aggregate network rate/prefactor");
  std::string ln_net;
  double ln_eps = 0.3;
  ld_net->add_option("net", ln_net, "network spec JSON")->required();
  ld_net->add_option("--eps", ln_eps, "deviation from the mean")->required();

  // --- report ---
  auto* rpt = app.add_subcommand("report", "ensemble estimators");
  rpt->require_subcommand(1);
  auto* rpt_stab = rpt->add_subcommand("stability", "rate-stability evidence");
  std::string rs_net2, rs_policy2 = "fifo", rs_out2;
  double rs_horizon2 = 10000.0, rs_dt2 = 0.0, rs_tol2 = 0.0;
  int rs_seeds2 = 20;
  std::uint64_t rs_base2 = 1;
  rpt_stab->add_option("net", rs_net2, "network spec JSON")->required();
  rpt_stab->add_option("--policy", rs_policy2, "fifo|lifo|gfifo|priority");
  rpt_stab->add_option("--horizon", rs_horizon2, "time horizon");
  rpt_stab->add_option("--seeds", rs_seeds2, "seed count");
  rpt_stab->add_option("--seed-base", rs_base2, "first seed");
  rpt_stab->add_option("--sample-dt", rs_dt2, "sampling interval");
  rpt_stab->add_option("--tol", rs_tol2, "throughput tolerance (0 = CLT default)");
  rpt_stab->add_option("-o,--out", rs_out2, "report JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (sim_run->parsed())
      return cmd_sim_run(sr_net, sr_policy, sr_q, sr_horizon, sr_seed, sr_dt,
                         sr_events, sr_out, sr_events_out);
    if (fl_sim->parsed())
      return cmd_fluid_simulate(fs_net, fs_q, fs_horizon, fs_prio, fs_out);
    if (fl_check->parsed()) return cmd_fluid_check(fc_net, fc_sol, fc_tol);
    if (fdp_dec->parsed()) return cmd_fdp_decompose(fd_net, fd_sol, fd_out);
    if (dvg_build->parsed())
      return cmd_divergent_build(db_net, db_witness, db_rs, db_q, db_horizon,
                                 db_out);
    if (atk_run->parsed())
      return cmd_attack_run(ar_net, ar_witness, ar_rs, ar_n, ar_seeds, ar_base,
                            ar_epochs, ar_horizon, ar_out);
    if (ld_rate->parsed()) return cmd_ld_rate(lr_family, lr_params, lr_eps, lr_dir);
    if (ld_verify->parsed())
      return cmd_ld_verify(lv_family, lv_params, lv_eps, lv_n, lv_z, lv_trials,
                           lv_seed);
    if (ld_net->parsed()) return cmd_ld_network(ln_net, ln_eps);
    if (rpt_stab->parsed())
      return cmd_report_stability(rs_net2, rs_policy2, rs_horizon2, rs_seeds2,
                                  rs_base2, rs_dt2, rs_tol2, rs_out2);
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kViolation;
  }
  return kInputError;
}
