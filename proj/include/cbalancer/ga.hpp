#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cbalancer/error.hpp"
#include "cbalancer/model.hpp"
#include "cbalancer/objective.hpp"

namespace cbalancer {

using Rng = std::mt19937_64;

struct GaConfig {
  std::size_t population_size = 200;
  std::size_t generations = 300;
  double crossover_prob = 0.9;
  double mutation_prob = 0.02;
  std::size_t elitism_count = 4;
  std::size_t tournament_size = 3;
  std::uint64_t seed = 1;
  ObjectiveWeights weights;

  void validate() const {
    auto bad = [](const std::string& why) { fail(ErrorCategory::InvalidConfig, "ga: " + why); };
    if (population_size < 2) bad("population_size must be >= 2");
    if (elitism_count >= population_size) bad("elitism_count must be < population_size");
    if (generations < 1) bad("generations must be >= 1");
    if (tournament_size < 1) bad("tournament_size must be >= 1");
    if (crossover_prob < 0.0 || crossover_prob > 1.0) bad("crossover_prob outside [0,1]");
    if (mutation_prob < 0.0 || mutation_prob > 1.0) bad("mutation_prob outside [0,1]");
    if (!weights.valid()) bad("alpha outside [0,1]");
  }
};

struct MigrationMove {
  std::string container_id;
  NodeId source = 0;
  NodeId target = 0;

  friend bool operator==(const MigrationMove&, const MigrationMove&) = default;
};

struct OptimizationResult {
  Placement best;
  FitnessBreakdown best_breakdown;
  std::vector<double> history;  // best fitness of each evaluated generation
  std::vector<MigrationMove> migrations;
  NormalizationBounds bounds;
};

inline std::vector<Placement> random_population(std::size_t k, std::size_t n_nodes,
                                                std::size_t size, Rng& rng) {
  if (n_nodes < 1) fail(ErrorCategory::InvalidConfig, "random_population: n_nodes must be >= 1");
  if (size < 2) fail(ErrorCategory::InvalidConfig, "random_population: size must be >= 2");
  std::uniform_int_distribution<NodeId> gene(0, static_cast<NodeId>(n_nodes - 1));
  std::vector<Placement> pop;
  pop.reserve(size);
  for (std::size_t p = 0; p < size; ++p) {
    std::vector<NodeId> a(k);
    for (auto& g : a) g = gene(rng);
    pop.emplace_back(std::move(a));
  }
  return pop;
}

inline std::vector<Placement> random_population(std::size_t k, std::size_t n_nodes,
                                                std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  return random_population(k, n_nodes, size, rng);
}

/// Single-point crossover: genes [0, cut) from one parent, [cut, k) from the other.
inline std::pair<Placement, Placement> crossover_at(const Placement& a, const Placement& b,
                                                    std::size_t cut) {
  if (a.size() != b.size()) fail(ErrorCategory::LengthMismatch, "crossover parents differ in length");
  std::vector<NodeId> c1(a.assignment()), c2(b.assignment());
  for (std::size_t i = cut; i < a.size(); ++i) std::swap(c1[i], c2[i]);
  return {Placement(std::move(c1)), Placement(std::move(c2))};
}

inline std::pair<Placement, Placement> crossover(const Placement& a, const Placement& b, Rng& rng) {
  if (a.size() != b.size()) fail(ErrorCategory::LengthMismatch, "crossover parents differ in length");
  if (a.size() < 2) return {a, b};
  std::uniform_int_distribution<std::size_t> cut(1, a.size() - 1);
  return crossover_at(a, b, cut(rng));
}

inline Placement mutate(Placement p, std::size_t n_nodes, double mutation_prob, Rng& rng) {
  if (mutation_prob <= 0.0 || n_nodes == 0) return p;
  std::bernoulli_distribution flip(mutation_prob);
  std::uniform_int_distribution<NodeId> gene(0, static_cast<NodeId>(n_nodes - 1));
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (flip(rng)) p[i] = gene(rng);
  }
  return p;
}

namespace detail {

struct Scored {
  double fitness;
  const Placement* placement;
};

// Lower fitness wins; ties go to the lexicographically smaller placement.
inline bool better(const Scored& a, const Scored& b) {
  if (a.fitness != b.fitness) return a.fitness < b.fitness;
  return *a.placement < *b.placement;
}

}  // namespace detail

inline std::vector<MigrationMove> diff_placements(const ClusterSnapshot& snapshot,
                                                  const Placement& target) {
  std::vector<MigrationMove> moves;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] != snapshot.placement[i]) {
      moves.push_back({snapshot.containers[i].container_id, snapshot.placement[i], target[i]});
    }
  }
  return moves;
}

/// Genetic search for the placement minimizing the weighted stability /
/// migration fitness. The incumbent placement always seeds generation 0.
inline OptimizationResult optimize(const ClusterSnapshot& snapshot, const GaConfig& config) {
  config.validate();
  if (snapshot.node_count() == 0) fail(ErrorCategory::EmptyCluster, "optimize: no nodes");
  if (!snapshot.placement.valid_for(snapshot.node_count()) ||
      snapshot.placement.size() != snapshot.container_count()) {
    fail(ErrorCategory::InvalidConfig, "optimize: snapshot placement invalid");
  }

  const std::size_t k = snapshot.container_count();
  const std::size_t n = snapshot.node_count();
  const auto& weights = config.weights;

  OptimizationResult result;
  if (k == 0) {
    result.best = snapshot.placement;
    result.best_breakdown = evaluate(snapshot, result.best, result.bounds, weights);
    result.history.assign(1, result.best_breakdown.fitness);
    return result;
  }

  Rng rng(config.seed);
  std::vector<Placement> pop = random_population(k, n, config.population_size, rng);
  pop[0] = snapshot.placement;

  auto stab = [&](const Placement& p) { return stability(snapshot.utilization, n, p); };

  std::vector<double> stabilities(pop.size());
  std::transform(pop.begin(), pop.end(), stabilities.begin(), stab);
  result.bounds = NormalizationBounds::for_population(stabilities, k);

  std::vector<detail::Scored> scored(pop.size());
  std::vector<std::size_t> order(pop.size());
  Placement best = snapshot.placement;
  double best_fitness = evaluate(stabilities[0], 0, result.bounds, weights).fitness;

  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  std::bernoulli_distribution do_crossover(config.crossover_prob);

  for (std::size_t g = 0; g < config.generations; ++g) {
    if (g > 0) std::transform(pop.begin(), pop.end(), stabilities.begin(), stab);
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const auto d = migration_distance(snapshot.placement, pop[i]);
      scored[i] = {evaluate(stabilities[i], d, result.bounds, weights).fitness, &pop[i]};
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return detail::better(scored[a], scored[b]);
    });

    const auto& top = scored[order[0]];
    if (detail::better(top, {best_fitness, &best})) {
      best = *top.placement;
      best_fitness = top.fitness;
    }
    result.history.push_back(top.fitness);
    if (g + 1 == config.generations) break;

    auto tournament = [&]() -> const Placement& {
      std::size_t winner = pick(rng);
      for (std::size_t t = 1; t < config.tournament_size; ++t) {
        const std::size_t c = pick(rng);
        if (detail::better(scored[c], scored[winner])) winner = c;
      }
      return pop[winner];
    };

    std::vector<Placement> next;
    next.reserve(pop.size());
    for (std::size_t e = 0; e < config.elitism_count; ++e) next.push_back(pop[order[e]]);
    while (next.size() < pop.size()) {
      const Placement& a = tournament();
      const Placement& b = tournament();
      auto children = do_crossover(rng) ? crossover(a, b, rng) : std::pair{a, b};
      next.push_back(mutate(std::move(children.first), n, config.mutation_prob, rng));
      if (next.size() < pop.size()) {
        next.push_back(mutate(std::move(children.second), n, config.mutation_prob, rng));
      }
    }
    pop = std::move(next);
    // scored[] points into pop; rebuilt at the top of the next iteration.
  }

  result.best = std::move(best);
  result.best_breakdown = evaluate(snapshot, result.best, result.bounds, weights);
  result.migrations = diff_placements(snapshot, result.best);
  return result;
}

}  // namespace cbalancer
