#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cbalancer/cbalancer.hpp"

namespace testsupport {

inline std::filesystem::path source_dir() { return CBALANCER_SOURCE_DIR; }
inline std::filesystem::path scenario_path(const std::string& name) {
  return source_dir() / "scenarios" / name;
}

inline cbalancer::ResourceVector cpu(double v) {
  cbalancer::ResourceVector r;
  r[cbalancer::ResourceKind::cpu] = v;
  return r;
}

/// Snapshot with one sample per container at tick 0; ids c00, c01, ...
inline cbalancer::ClusterSnapshot snapshot_of(const std::vector<cbalancer::ResourceVector>& util,
                                              const std::vector<cbalancer::NodeId>& hosts,
                                              std::size_t node_count) {
  using namespace cbalancer;
  std::vector<ContainerProfile> profiles;
  for (std::size_t i = 0; i < util.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "c%02zu", i);
    profiles.push_back({id, {{0, util[i]}}, hosts[i]});
  }
  std::vector<NodeSpec> nodes;
  for (std::size_t n = 0; n < node_count; ++n) nodes.push_back({static_cast<NodeId>(n), ResourceVector::filled(1.0)});
  return build_snapshot(std::move(profiles), std::move(nodes), 0);
}

inline cbalancer::ContainerSpec spec(const std::string& id, cbalancer::ResourceVector demand,
                                     double base = 100.0, cbalancer::Tick duration = 120,
                                     cbalancer::Tick arrival = 0) {
  cbalancer::ContainerSpec s;
  s.container_id = id;
  s.class_name = id;
  s.image_ref = "img";
  s.demand = demand;
  s.base_throughput = base;
  s.duration_ticks = duration;
  s.arrival_tick = arrival;
  return s;
}

template <typename F>
cbalancer::ErrorCategory category_of(F&& f) {
  try {
    f();
  } catch (const cbalancer::Error& e) {
    return e.category();
  }
  throw std::runtime_error("expected a cbalancer::Error");
}

}  // namespace testsupport

namespace testsupport {

/// Scenario built from the bundled presets plus `body`.
inline cbalancer::Scenario preset_scenario(const std::string& body) {
  return cbalancer::parse_scenario("include = ../data/presets/stress-ng.conf\n" + body,
                                   scenario_path("inline.conf"));
}

/// Per-container throughput with `replicas` copies of `cls` on a single node.
inline double colocated_throughput(const cbalancer::Scenario& sc, const std::string& cls,
                                   std::size_t replicas) {
  using namespace cbalancer;
  ContainerSpec s;
  s.demand = sc.classes.at(cls).demand;
  s.base_throughput = sc.classes.at(cls).base_throughput;
  ResourceVector total;
  for (std::size_t i = 0; i < replicas; ++i) total += s.demand;
  const auto cap = ResourceVector::filled(1.0);
  ResourceVector delivered;
  for (auto r : kAllResources) delivered[r] = proportional_share(s.demand[r], total[r], cap[r]);
  return container_throughput(s, delivered, overcommit(total, cap), sc.contention);
}

}  // namespace testsupport
