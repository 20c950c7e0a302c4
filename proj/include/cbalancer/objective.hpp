#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "cbalancer/error.hpp"
#include "cbalancer/model.hpp"

namespace cbalancer {

// Which weight alpha multiplies. `formula`: f = a*S_n + (1-a)*d_n.
// `prose`: the weights are swapped, so alpha = 1 means "avoid migrations".
enum class AlphaConvention { formula, prose };

constexpr std::string_view convention_name(AlphaConvention c) {
  return c == AlphaConvention::formula ? "formula" : "prose";
}

struct ObjectiveWeights {
  double alpha = 0.85;
  AlphaConvention convention = AlphaConvention::formula;

  bool valid() const { return alpha >= 0.0 && alpha <= 1.0; }
  double stability_weight() const {
    return convention == AlphaConvention::formula ? alpha : 1.0 - alpha;
  }
  double migration_weight() const { return 1.0 - stability_weight(); }
};

struct FitnessBreakdown {
  double stability_raw = 0.0;
  std::size_t migration_count = 0;
  double stability_norm = 0.0;
  double migration_norm = 0.0;
  double fitness = 0.0;
};

/// Mean utilization of `resource` over the containers placed on `node`; 0 for an idle node.
inline double mean_node_utilization(std::span<const ResourceVector> utilization,
                                    const Placement& placement, ResourceKind resource,
                                    NodeId node) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < placement.size(); ++i) {
    if (placement[i] == node) {
      sum += utilization[i][resource];
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

inline double mean_node_utilization(const ClusterSnapshot& snapshot, const Placement& placement,
                                    ResourceKind resource, NodeId node) {
  if (node >= snapshot.node_count()) {
    fail(ErrorCategory::UnknownNode, "node " + std::to_string(node) + " not in snapshot");
  }
  if (placement.size() != snapshot.container_count()) {
    fail(ErrorCategory::LengthMismatch, "placement length differs from container count");
  }
  return mean_node_utilization(snapshot.utilization, placement, resource, node);
}

/// Sum over resources of the across-node variance (population sum of squared
/// deviations) of the per-node mean container utilization.
inline double stability(std::span<const ResourceVector> utilization, std::size_t node_count,
                        const Placement& placement) {
  if (node_count == 0) return 0.0;
  std::vector<ResourceVector> sums(node_count);
  std::vector<std::size_t> counts(node_count, 0);
  for (std::size_t i = 0; i < placement.size(); ++i) {
    sums[placement[i]] += utilization[i];
    ++counts[placement[i]];
  }
  double s = 0.0;
  std::vector<double> means(node_count);
  for (auto r : kAllResources) {
    double total = 0.0;
    for (std::size_t n = 0; n < node_count; ++n) {
      means[n] = counts[n] == 0 ? 0.0 : sums[n][r] / static_cast<double>(counts[n]);
      total += means[n];
    }
    const double avg = total / static_cast<double>(node_count);
    for (double m : means) s += (m - avg) * (m - avg);
  }
  return s;
}

inline double stability(const ClusterSnapshot& snapshot, const Placement& placement) {
  if (placement.size() != snapshot.container_count()) {
    fail(ErrorCategory::LengthMismatch, "placement length differs from container count");
  }
  return stability(snapshot.utilization, snapshot.node_count(), placement);
}

/// Hamming distance between two placements.
inline std::size_t migration_distance(const Placement& x, const Placement& y) {
  if (x.size() != y.size()) {
    fail(ErrorCategory::LengthMismatch, "placements differ in length");
  }
  std::size_t d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d += x[i] != y[i] ? 1 : 0;
  return d;
}

/// Min-max normalization; a degenerate range maps everything to 0.
inline std::vector<double> normalize_population(std::span<const double> values) {
  if (values.empty()) fail(ErrorCategory::EmptyInput, "cannot normalize an empty sequence");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(range > 0.0 ? (v - *lo) / range : 0.0);
  return out;
}

/// Lower is better.
inline double fitness(double stability_norm, double migration_norm,
                      const ObjectiveWeights& weights) {
  return weights.stability_weight() * stability_norm +
         weights.migration_weight() * migration_norm;
}

/// Scales that map raw S and d^MIG onto [0,1]. Fixed for one optimization so
/// that fitness is a function of the placement alone.
struct NormalizationBounds {
  double stability_scale = 1.0;  // S_n = S / stability_scale
  double migration_scale = 1.0;  // d_n = d / migration_scale

  static NormalizationBounds for_population(std::span<const double> stabilities,
                                            std::size_t container_count) {
    NormalizationBounds b;
    double s_max = 0.0;
    for (double s : stabilities) s_max = std::max(s_max, s);
    b.stability_scale = s_max > 0.0 ? s_max : 1.0;
    b.migration_scale = container_count > 0 ? static_cast<double>(container_count) : 1.0;
    return b;
  }
};

inline FitnessBreakdown evaluate(double stability_raw, std::size_t migrations,
                                 const NormalizationBounds& bounds,
                                 const ObjectiveWeights& weights) {
  FitnessBreakdown fb;
  fb.stability_raw = stability_raw;
  fb.migration_count = migrations;
  fb.stability_norm = stability_raw / bounds.stability_scale;
  fb.migration_norm = static_cast<double>(migrations) / bounds.migration_scale;
  fb.fitness = fitness(fb.stability_norm, fb.migration_norm, weights);
  return fb;
}

inline FitnessBreakdown evaluate(const ClusterSnapshot& snapshot, const Placement& candidate,
                                 const NormalizationBounds& bounds,
                                 const ObjectiveWeights& weights) {
  return evaluate(stability(snapshot, candidate),
                  migration_distance(snapshot.placement, candidate), bounds, weights);
}

}  // namespace cbalancer
