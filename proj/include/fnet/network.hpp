#pragma once

#include <string>
#include <vector>

#include "fnet/dist.hpp"

namespace fnet {

struct StageSpec {
  double mu = 0.0;
  DistSpec service;
};

struct TypeSpec {
  std::vector<int> route;  // station index per stage; repeats allowed
  double lambda = 0.0;
  DistSpec arrival;
  std::vector<StageSpec> stages;  // same length as route
};

// Multitype network topology: each type-i job follows route(i, 1..J_i); the
// pair (type, stage) is a class, queued at station route[stage].
struct NetworkSpec {
  int stations = 0;
  std::vector<TypeSpec> types;

  // Index layout, filled by finalize(): classes are flattened in (type, stage)
  // lexicographic order.
  int class_count = 0;
  std::vector<int> class_offset;               // per type
  std::vector<int> class_type, class_stage;    // per class
  std::vector<int> station_of;                 // per class
  std::vector<std::vector<int>> station_classes;  // per station, ascending

  void finalize();

  int cls(int type, int stage) const { return class_offset[type] + stage; }
  double mu(int c) const { return types[class_type[c]].stages[class_stage[c]].mu; }
  double lambda(int type) const { return types[type].lambda; }
  bool is_last_stage(int c) const {
    return class_stage[c] + 1 == static_cast<int>(types[class_type[c]].route.size());
  }
  const DistSpec& service_dist(int c) const {
    return types[class_type[c]].stages[class_stage[c]].service;
  }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_network(const NetworkSpec& spec);

// Scale constants of the network. c_big strictly exceeds the bound
// 13 (lambda_max + mu_max)^2 I jmax^3 and, in particular, the total arrival
// plus service rate of the network.
struct Constants {
  double lambda_max = 0.0;
  double mu_max = 0.0;
  int j_max = 0;
  double c_big = 0.0;
  int class_count = 0;
};

Constants derived_constants(const NetworkSpec& spec);

// Strict JSON parsing (unknown keys rejected). Throws std::invalid_argument
// on malformed input.
NetworkSpec network_from_json(const std::string& text);
std::string network_to_json(const NetworkSpec& spec);
NetworkSpec load_network_file(const std::string& path);

}  // namespace fnet
