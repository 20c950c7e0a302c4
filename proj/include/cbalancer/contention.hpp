#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "cbalancer/model.hpp"
#include "cbalancer/resources.hpp"

namespace cbalancer {

// Per-resource interference severity. CPU co-location hurts far less than
// cache, memory bandwidth or the network.
struct ContentionParams {
  ResourceVector interference_gamma{{0.1, 0.5, 0.6, 0.3, 0.8}};

  bool valid() const { return interference_gamma.non_negative(); }
};

/// What one consumer gets when `total` is requested from `capacity`.
inline double proportional_share(double demand, double total, double capacity) {
  return total <= capacity ? demand : capacity * demand / total;
}

/// Proportional share of one resource's capacity among competing demands.
inline std::vector<double> delivered_share(std::span<const double> demands, double capacity) {
  double total = 0.0;
  for (double d : demands) total += d;
  std::vector<double> out;
  out.reserve(demands.size());
  for (double d : demands) out.push_back(proportional_share(d, total, capacity));
  return out;
}

/// max(0, total demand - capacity) per resource.
inline ResourceVector overcommit(const ResourceVector& total_demand, const ResourceVector& capacity) {
  ResourceVector oc;
  for (auto r : kAllResources) oc[r] = std::max(0.0, total_demand[r] - capacity[r]);
  return oc;
}

inline double container_throughput(const ContainerSpec& spec, const ResourceVector& delivered,
                                   const ResourceVector& colocated_overcommit,
                                   const ContentionParams& params) {
  double share = 1.0;
  for (auto r : kAllResources) {
    if (spec.demand[r] > 0.0) share = std::min(share, delivered[r] / spec.demand[r]);
  }
  double penalty = 1.0;
  for (auto r : kAllResources) {
    penalty *= 1.0 / (1.0 + params.interference_gamma[r] * colocated_overcommit[r]);
  }
  return spec.base_throughput * share * penalty;
}

/// Fraction of datagrams lost by a network-bound container on an overcommitted link.
inline double dropped_fraction(const ContainerSpec& spec, const ResourceVector& colocated_overcommit) {
  if (spec.demand[ResourceKind::network] <= 0.0) return 0.0;
  const double oc = colocated_overcommit[ResourceKind::network];
  return oc / (1.0 + oc);
}

}  // namespace cbalancer
