#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cbalancer/error.hpp"
#include "cbalancer/resources.hpp"

namespace cbalancer {

using NodeId = std::uint32_t;
using Tick = std::int64_t;

struct ContainerSpec {
  std::string container_id;
  std::string class_name;
  std::string image_ref;
  ResourceVector demand;  // standalone steady-state demand
  std::uint64_t memory_footprint_bytes = 0;
  double base_throughput = 1.0;  // ops/s uncontended
  Tick duration_ticks = 1;
  Tick arrival_tick = 0;
  std::uint32_t thread_count = 1;
  std::uint64_t fs_write_bytes_per_tick = 0;  // grows the init layer
};

struct ProfileSample {
  Tick tick = 0;
  ResourceVector utilization;
};

struct ContainerProfile {
  std::string container_id;
  std::vector<ProfileSample> samples;  // strictly increasing ticks
  NodeId host_node = 0;
};

struct NodeSpec {
  NodeId node_id = 0;
  ResourceVector capacity = ResourceVector::filled(1.0);
};

/// Chromosome: assignment[i] is the node hosting container i.
class Placement {
 public:
  Placement() = default;
  explicit Placement(std::vector<NodeId> assignment) : assignment_(std::move(assignment)) {}

  std::size_t size() const { return assignment_.size(); }
  bool empty() const { return assignment_.empty(); }
  NodeId operator[](std::size_t i) const { return assignment_[i]; }
  NodeId& operator[](std::size_t i) { return assignment_[i]; }
  const std::vector<NodeId>& assignment() const { return assignment_; }

  bool valid_for(std::size_t node_count) const {
    return std::all_of(assignment_.begin(), assignment_.end(),
                       [&](NodeId n) { return n < node_count; });
  }

  friend bool operator==(const Placement&, const Placement&) = default;
  friend auto operator<=>(const Placement& a, const Placement& b) {
    return a.assignment_ <=> b.assignment_;
  }

 private:
  std::vector<NodeId> assignment_;
};

/// Most recent sample at or before `tick`.
inline const ResourceVector& latest_utilization(const ContainerProfile& profile, Tick tick) {
  auto it = std::upper_bound(profile.samples.begin(), profile.samples.end(), tick,
                             [](Tick t, const ProfileSample& s) { return t < s.tick; });
  if (it == profile.samples.begin()) {
    fail(ErrorCategory::NoSample,
         "container " + profile.container_id + " has no sample at or before tick " +
             std::to_string(tick));
  }
  return std::prev(it)->utilization;
}

/// Point-in-time cluster view; container order defines the chromosome index.
struct ClusterSnapshot {
  Tick tick = 0;
  std::vector<NodeSpec> nodes;
  std::vector<ContainerProfile> containers;
  Placement placement;
  std::vector<ResourceVector> utilization;  // latest_utilization(containers[i], tick)

  std::size_t node_count() const { return nodes.size(); }
  std::size_t container_count() const { return containers.size(); }
};

inline ClusterSnapshot build_snapshot(std::vector<ContainerProfile> profiles,
                                      std::vector<NodeSpec> nodes, Tick tick) {
  if (nodes.empty()) fail(ErrorCategory::EmptyCluster, "snapshot needs at least one node");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].node_id != i) {
      fail(ErrorCategory::InvalidConfig, "node ids must be dense 0..N-1");
    }
  }
  std::sort(profiles.begin(), profiles.end(),
            [](const ContainerProfile& a, const ContainerProfile& b) {
              return a.container_id < b.container_id;
            });

  ClusterSnapshot snap;
  snap.tick = tick;
  std::vector<NodeId> assignment;
  assignment.reserve(profiles.size());
  snap.utilization.reserve(profiles.size());
  for (const auto& p : profiles) {
    if (p.host_node >= nodes.size()) {
      fail(ErrorCategory::UnknownNode, "container " + p.container_id + " references node " +
                                           std::to_string(p.host_node));
    }
    assignment.push_back(p.host_node);
    snap.utilization.push_back(latest_utilization(p, tick));
  }
  snap.nodes = std::move(nodes);
  snap.containers = std::move(profiles);
  snap.placement = Placement(std::move(assignment));
  return snap;
}

}  // namespace cbalancer
