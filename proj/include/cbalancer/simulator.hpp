#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "cbalancer/contention.hpp"
#include "cbalancer/error.hpp"
#include "cbalancer/ga.hpp"
#include "cbalancer/model.hpp"
#include "cbalancer/objective.hpp"
#include "cbalancer/registry.hpp"

namespace cbalancer {

enum class Strategy { spread, binpack, random, cbalancer };

constexpr std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::spread: return "spread";
    case Strategy::binpack: return "binpack";
    case Strategy::random: return "random";
    case Strategy::cbalancer: return "cbalancer";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  for (auto v : {Strategy::spread, Strategy::binpack, Strategy::random, Strategy::cbalancer}) {
    if (strategy_name(v) == s) return v;
  }
  return std::nullopt;
}

/// What the baseline schedulers see of one node.
struct NodeLoad {
  std::size_t active = 0;
  ResourceVector demand;
  ResourceVector capacity = ResourceVector::filled(1.0);
};

struct ScheduleDecision {
  NodeId node = 0;
  bool feasible = true;  // false: binpack found no fitting node and fell back
};

/// Swarm-style placement of one arriving container. `cbalancer` places like
/// spread; rebalancing happens later through the control plane.
inline ScheduleDecision schedule_baseline(Strategy strategy, const ContainerSpec& arriving,
                                          const std::vector<NodeLoad>& nodes, Rng& rng) {
  if (nodes.empty()) fail(ErrorCategory::EmptyCluster, "no nodes to schedule on");
  switch (strategy) {
    case Strategy::spread:
    case Strategy::cbalancer: {
      std::size_t least = nodes[0].active;
      for (const auto& n : nodes) least = std::min(least, n.active);
      std::vector<NodeId> ties;
      for (NodeId i = 0; i < nodes.size(); ++i) {
        if (nodes[i].active == least) ties.push_back(i);
      }
      if (ties.size() == 1) return {ties[0], true};
      std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
      return {ties[pick(rng)], true};
    }
    case Strategy::binpack: {
      std::optional<NodeId> best;
      for (NodeId i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i].demand + arriving.demand).fits_within(nodes[i].capacity)) continue;
        if (!best || nodes[i].demand.sum() > nodes[*best].demand.sum()) best = i;
      }
      if (best) return {*best, true};
      NodeId least = 0;
      for (NodeId i = 1; i < nodes.size(); ++i) {
        if (nodes[i].demand.sum() < nodes[least].demand.sum()) least = i;
      }
      return {least, false};
    }
    case Strategy::random: {
      std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(nodes.size() - 1));
      return {pick(rng), true};
    }
  }
  return {0, true};
}

enum class ContainerStatus { pending, running, migrating, finished };

struct ContainerState {
  ContainerSpec spec;
  ContainerStatus status = ContainerStatus::pending;
  NodeId host = 0;
  Tick remaining_ticks = 0;
  double work_done = 0.0;  // Bogo Ops
  std::uint64_t bytes_written = 0;
  std::size_t migration_count = 0;
  // In-flight migration.
  NodeId migration_target = 0;
  Tick resume_tick = 0;
  // Last computed tick.
  ResourceVector delivered;
  double throughput = 0.0;
  double dropped = 0.0;
  ContainerProfile profile;

  bool running() const { return status == ContainerStatus::running; }
};

struct ContainerTick {
  std::string container_id;
  NodeId node = 0;
  ResourceVector delivered;
  double throughput = 0.0;
  double dropped_fraction = 0.0;
  bool network = false;
};

struct TickReport {
  Tick tick = 0;
  std::vector<ContainerTick> containers;
  std::vector<ResourceVector> node_utilization;
  double stability = 0.0;

  double total_throughput() const {
    double s = 0.0;
    for (const auto& c : containers) s += c.throughput;
    return s;
  }
};

struct WorldConfig {
  std::vector<NodeSpec> nodes;
  ContentionParams contention;
  Strategy strategy = Strategy::spread;
  Tick profiling_interval = 5;
  std::uint64_t seed = 1;
};

/// Whole simulated cluster. Owned by the tick loop; everything else reads
/// TickReports or goes through the migration engine.
struct World {
  std::vector<NodeSpec> nodes;
  ContentionParams contention;
  Strategy strategy = Strategy::spread;
  Tick profiling_interval = 5;
  Rng rng;
  Tick now = 0;
  std::vector<ContainerState> containers;  // workload order
  std::map<std::string, std::size_t> index;
  std::map<std::string, ImageManifest> images;
  RegistryState registry;
  std::vector<DigestSet> node_layers;
  std::size_t infeasible_placements = 0;

  World() = default;
  explicit World(const WorldConfig& cfg)
      : nodes(cfg.nodes),
        contention(cfg.contention),
        strategy(cfg.strategy),
        profiling_interval(cfg.profiling_interval),
        rng(cfg.seed),
        node_layers(cfg.nodes.size()) {
    if (nodes.empty()) fail(ErrorCategory::EmptyCluster, "world needs at least one node");
    if (profiling_interval < 1) fail(ErrorCategory::InvalidConfig, "profiling interval must be >= 1");
  }

  void add_image(ImageManifest image) {
    auto ref = image.image_ref;
    images[ref] = std::move(image);
  }

  void add_container(const ContainerSpec& spec) {
    if (index.count(spec.container_id)) {
      fail(ErrorCategory::ValidationError, "duplicate container id " + spec.container_id);
    }
    if (spec.base_throughput <= 0.0 || spec.duration_ticks < 1) {
      fail(ErrorCategory::ValidationError, "container " + spec.container_id +
                                               " needs base_throughput > 0 and duration >= 1");
    }
    ContainerState c;
    c.spec = spec;
    c.remaining_ticks = spec.duration_ticks;
    c.profile.container_id = spec.container_id;
    index[spec.container_id] = containers.size();
    containers.push_back(std::move(c));
  }

  ContainerState* find(const std::string& id) {
    auto it = index.find(id);
    return it == index.end() ? nullptr : &containers[it->second];
  }
  const ContainerState* find(const std::string& id) const {
    auto it = index.find(id);
    return it == index.end() ? nullptr : &containers[it->second];
  }

  std::vector<NodeLoad> node_loads() const {
    std::vector<NodeLoad> loads(nodes.size());
    for (std::size_t n = 0; n < nodes.size(); ++n) loads[n].capacity = nodes[n].capacity;
    for (const auto& c : containers) {
      if (!c.running()) continue;
      ++loads[c.host].active;
      loads[c.host].demand += c.spec.demand;
    }
    return loads;
  }

  /// Containers currently running on `node`, by workload index.
  std::vector<std::size_t> running_on(NodeId node) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < containers.size(); ++i) {
      if (containers[i].running() && containers[i].host == node) out.push_back(i);
    }
    return out;
  }

  bool idle() const {
    return std::all_of(containers.begin(), containers.end(), [](const ContainerState& c) {
      return c.status == ContainerStatus::finished;
    });
  }

  /// Running containers ordered by id, and their placement.
  ClusterSnapshot running_snapshot() const;

  /// Advances one tick and reports it.
  TickReport step();

 private:
  void admit(ContainerState& c) {
    auto decision = schedule_baseline(strategy, c.spec, node_loads(), rng);
    if (!decision.feasible) ++infeasible_placements;
    c.host = decision.node;
    c.status = ContainerStatus::running;
    if (auto it = images.find(c.spec.image_ref); it != images.end()) {
      for (const auto& l : it->second.layers) node_layers[c.host].insert(l.digest);
    }
  }
};

inline TickReport World::step() {
  TickReport report;
  report.tick = now;

  for (auto& c : containers) {
    if (c.status == ContainerStatus::migrating && c.resume_tick == now) {
      c.host = c.migration_target;
      c.status = ContainerStatus::running;
    }
  }
  for (auto& c : containers) {
    if (c.status == ContainerStatus::pending && c.spec.arrival_tick == now) admit(c);
  }

  const auto loads = node_loads();
  report.node_utilization.assign(nodes.size(), ResourceVector{});
  std::vector<ResourceVector> node_overcommit(nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    node_overcommit[n] = overcommit(loads[n].demand, nodes[n].capacity);
  }

  std::vector<ResourceVector> running_util;
  std::vector<NodeId> running_hosts;
  for (auto& c : containers) {
    if (!c.running()) continue;
    const auto& load = loads[c.host];
    ResourceVector delivered;
    for (auto r : kAllResources) {
      delivered[r] = proportional_share(c.spec.demand[r], load.demand[r], nodes[c.host].capacity[r]);
    }
    c.delivered = delivered;
    c.throughput = container_throughput(c.spec, delivered, node_overcommit[c.host], contention);
    c.dropped = dropped_fraction(c.spec, node_overcommit[c.host]);
    c.work_done += c.throughput;
    c.bytes_written += c.spec.fs_write_bytes_per_tick;
    --c.remaining_ticks;
    report.node_utilization[c.host] += delivered;
    if (now % profiling_interval == 0) c.profile.samples.push_back({now, delivered});
    c.profile.host_node = c.host;
    report.containers.push_back({c.spec.container_id, c.host, delivered, c.throughput, c.dropped,
                                 c.spec.demand[ResourceKind::network] > 0.0});
    running_util.push_back(delivered);
    running_hosts.push_back(c.host);
  }
  report.stability = stability(running_util, nodes.size(), Placement(running_hosts));

  for (auto& c : containers) {
    if (c.running() && c.remaining_ticks <= 0) c.status = ContainerStatus::finished;
  }
  ++now;
  return report;
}

inline ClusterSnapshot World::running_snapshot() const {
  std::vector<ContainerProfile> profiles;
  for (const auto& c : containers) {
    if (!c.running()) continue;
    ContainerProfile p;
    p.container_id = c.spec.container_id;
    p.host_node = c.host;
    p.samples.push_back({now, c.delivered});
    profiles.push_back(std::move(p));
  }
  return build_snapshot(std::move(profiles), nodes, now);
}

}  // namespace cbalancer
