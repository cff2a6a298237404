#include "fnet/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fnet {

void NetworkSpec::finalize() {
  class_offset.clear();
  class_type.clear();
  class_stage.clear();
  station_of.clear();
  station_classes.assign(std::max(stations, 0), {});
  class_count = 0;
  for (int i = 0; i < static_cast<int>(types.size()); ++i) {
    class_offset.push_back(class_count);
    const auto& t = types[i];
    for (int j = 0; j < static_cast<int>(t.route.size()); ++j) {
      class_type.push_back(i);
      class_stage.push_back(j);
      const int st = t.route[j];
      station_of.push_back(st);
      if (st >= 0 && st < stations) station_classes[st].push_back(class_count);
      ++class_count;
    }
  }
}

ValidationReport validate_network(const NetworkSpec& spec) {
  ValidationReport rep;
  auto add = [&rep](const std::string& msg) { rep.violations.push_back(msg); };
  auto finite_pos = [](double x) { return std::isfinite(x) && x > 0.0; };

  if (spec.stations <= 0) add("station count must be positive");
  if (spec.types.empty()) add("at least one type required");
  for (size_t i = 0; i < spec.types.size(); ++i) {
    const auto& t = spec.types[i];
    const std::string who = "type " + std::to_string(i);
    if (t.route.empty()) add(who + ": route must be nonempty");
    if (t.route.size() != t.stages.size())
      add(who + ": route and stages length mismatch");
    for (size_t j = 0; j < t.route.size(); ++j) {
      if (t.route[j] < 0 || t.route[j] >= spec.stations)
        add(who + " stage " + std::to_string(j) + ": route index out of range");
    }
    if (!finite_pos(t.lambda)) add(who + ": rate must be positive");
    if (!t.arrival.well_formed()) {
      add(who + ": malformed arrival distribution");
    } else if (finite_pos(t.lambda)) {
      const double m = t.arrival.mean();
      if (std::abs(m - 1.0 / t.lambda) > 1e-9 * std::max(1.0, 1.0 / t.lambda))
        add(who + ": arrival distribution mean inconsistent with lambda");
    }
    for (size_t j = 0; j < t.stages.size(); ++j) {
      const auto& s = t.stages[j];
      const std::string cwho = who + " stage " + std::to_string(j);
      if (!finite_pos(s.mu)) add(cwho + ": rate must be positive");
      if (!s.service.well_formed()) {
        add(cwho + ": malformed service distribution");
      } else if (finite_pos(s.mu)) {
        const double m = s.service.mean();
        if (std::abs(m - 1.0 / s.mu) > 1e-9 * std::max(1.0, 1.0 / s.mu))
          add(cwho + ": service distribution mean inconsistent with mu");
      }
    }
  }
  return rep;
}

Constants derived_constants(const NetworkSpec& spec) {
  auto rep = validate_network(spec);
  if (!rep.ok()) throw std::invalid_argument("invalid network: " + rep.violations.front());
  Constants c;
  for (const auto& t : spec.types) {
    c.lambda_max = std::max({c.lambda_max, t.lambda, 1.0 / t.lambda});
    c.j_max = std::max(c.j_max, static_cast<int>(t.route.size()));
    for (const auto& s : t.stages)
      c.mu_max = std::max({c.mu_max, s.mu, 1.0 / s.mu});
  }
  const double sum = c.lambda_max + c.mu_max;
  const double jm = static_cast<double>(c.j_max);
  c.c_big = 13.0 * sum * sum * static_cast<double>(spec.types.size()) * jm * jm * jm + 1.0;
  c.class_count = 0;
  for (const auto& t : spec.types) c.class_count += static_cast<int>(t.route.size());
  return c;
}

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> keys,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) known = true;
    if (!known)
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
  }
}

DistSpec dist_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": dist must be an object");
  reject_unknown(j, {"family", "params"}, where);
  if (!j.contains("family") || !j.contains("params"))
    throw std::invalid_argument(where + ": dist needs 'family' and 'params'");
  DistSpec d;
  d.family = dist_family_from_name(j.at("family").get<std::string>());
  d.params = j.at("params").get<std::vector<double>>();
  return d;
}

json dist_to_json(const DistSpec& d) {
  return json{{"family", d.family_name()}, {"params", d.params}};
}

}  // namespace

NetworkSpec network_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("network JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("network spec must be a JSON object");
  reject_unknown(j, {"stations", "types"}, "network");
  NetworkSpec spec;
  spec.stations = j.at("stations").get<int>();
  if (!j.at("types").is_array()) throw std::invalid_argument("'types' must be an array");
  int idx = 0;
  for (const auto& jt : j.at("types")) {
    const std::string where = "types[" + std::to_string(idx++) + "]";
    reject_unknown(jt, {"route", "lambda", "arrival", "stages"}, where);
    TypeSpec t;
    t.route = jt.at("route").get<std::vector<int>>();
    t.lambda = jt.at("lambda").get<double>();
    t.arrival = dist_from_json(jt.at("arrival"), where + ".arrival");
    int sidx = 0;
    for (const auto& js : jt.at("stages")) {
      const std::string swhere = where + ".stages[" + std::to_string(sidx++) + "]";
      reject_unknown(js, {"mu", "service"}, swhere);
      StageSpec s;
      s.mu = js.at("mu").get<double>();
      s.service = dist_from_json(js.at("service"), swhere + ".service");
      t.stages.push_back(s);
    }
    spec.types.push_back(std::move(t));
  }
  spec.finalize();
  return spec;
}

std::string network_to_json(const NetworkSpec& spec) {
  json jtypes = json::array();
  for (const auto& t : spec.types) {
    json jstages = json::array();
    for (const auto& s : t.stages)
      jstages.push_back(json{{"mu", s.mu}, {"service", dist_to_json(s.service)}});
    jtypes.push_back(json{{"route", t.route},
                          {"lambda", t.lambda},
                          {"arrival", dist_to_json(t.arrival)},
                          {"stages", jstages}});
  }
  return json{{"stations", spec.stations}, {"types", jtypes}}.dump(2);
}

NetworkSpec load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open network file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return network_from_json(ss.str());
}

}  // namespace fnet
