#include <gtest/gtest.h>

#include "support.hpp"

using namespace cbalancer;
using testsupport::cpu;

namespace {

World make(std::size_t n, Strategy strategy = Strategy::spread, std::uint64_t seed = 1) {
  WorldConfig cfg;
  for (std::size_t i = 0; i < n; ++i) cfg.nodes.push_back({static_cast<NodeId>(i), ResourceVector::filled(1.0)});
  cfg.strategy = strategy;
  cfg.seed = seed;
  return World(cfg);
}

std::vector<NodeLoad> loads_with_counts(std::vector<std::size_t> counts) {
  std::vector<NodeLoad> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out[i].active = counts[i];
  return out;
}

}  // namespace

TEST(ScheduleBaseline, SpreadPicksLeastBusy) {
  Rng rng(1);
  auto d = schedule_baseline(Strategy::spread, testsupport::spec("a", cpu(0.1)), loads_with_counts({2, 1, 3}), rng);
  EXPECT_EQ(d.node, 1u);
}

TEST(ScheduleBaseline, SpreadBreaksTiesRandomly) {
  Rng rng(5);
  std::vector<int> hits(3, 0);
  for (int i = 0; i < 300; ++i) {
    ++hits[schedule_baseline(Strategy::spread, testsupport::spec("a", cpu(0.1)), loads_with_counts({1, 1, 1}), rng).node];
  }
  for (int h : hits) EXPECT_GT(h, 50);
}

TEST(ScheduleBaseline, BinpackFeasibilityFilter) {
  Rng rng(1);
  std::vector<NodeLoad> loads(2);
  loads[0].demand = cpu(0.9);
  loads[1].demand = cpu(0.5);
  auto d = schedule_baseline(Strategy::binpack, testsupport::spec("a", cpu(0.3)), loads, rng);
  EXPECT_EQ(d.node, 1u);
  EXPECT_TRUE(d.feasible);
  // nothing fits: least-loaded fallback, flagged
  auto big = schedule_baseline(Strategy::binpack, testsupport::spec("b", cpu(0.7)), loads, rng);
  EXPECT_EQ(big.node, 1u);
  EXPECT_FALSE(big.feasible);
}

TEST(ScheduleBaseline, RandomIsReproducible) {
  auto draw = [](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<NodeId> out;
    for (int i = 0; i < 50; ++i) {
      out.push_back(schedule_baseline(Strategy::random, testsupport::spec("a", cpu(0.1)), loads_with_counts({0, 0, 0, 0}), rng).node);
    }
    return out;
  };
  EXPECT_EQ(draw(8), draw(8));
}

TEST(World, EmptyClusterTick) {
  auto w = make(3);
  auto r = w.step();
  EXPECT_TRUE(r.containers.empty());
  ASSERT_EQ(r.node_utilization.size(), 3u);
  for (const auto& u : r.node_utilization) EXPECT_EQ(u, ResourceVector{});
  EXPECT_EQ(r.stability, 0.0);
}

TEST(World, RetirementAndClosedFormWork) {
  auto w = make(2);
  w.add_container(testsupport::spec("solo", cpu(0.5), 37.5, 120, 0));
  for (Tick t = 0; t < 130; ++t) {
    auto r = w.step();
    if (t < 120) {
      ASSERT_EQ(r.containers.size(), 1u) << t;
      EXPECT_EQ(r.containers[0].throughput, 37.5);
    } else {
      EXPECT_TRUE(r.containers.empty()) << t;
    }
  }
  EXPECT_EQ(w.find("solo")->work_done, 37.5 * 120);
  EXPECT_EQ(w.find("solo")->status, ContainerStatus::finished);
}

TEST(World, ArrivalsWaitForTheirTick) {
  auto w = make(1);
  w.add_container(testsupport::spec("late", cpu(0.1), 10.0, 5, 3));
  for (Tick t = 0; t < 3; ++t) EXPECT_TRUE(w.step().containers.empty());
  EXPECT_EQ(w.step().containers.size(), 1u);
}

TEST(World, ConservationAndProfileCadence) {
  auto w = make(2, Strategy::random, 3);
  for (int i = 0; i < 9; ++i) {
    ResourceVector d = cpu(0.3 + 0.05 * i);
    d[ResourceKind::cache] = 0.2;
    w.add_container(testsupport::spec("c" + std::to_string(i), d, 100.0, 40, i % 3));
  }
  for (Tick t = 0; t < 45; ++t) {
    auto r = w.step();
    for (const auto& u : r.node_utilization) {
      for (auto k : kAllResources) EXPECT_LE(u[k], 1.0 + 1e-12);
    }
    for (const auto& c : r.containers) {
      EXPECT_GE(c.throughput, 0.0);
      EXPECT_LE(c.throughput, 100.0);
    }
  }
  for (const auto& c : w.containers) {
    for (std::size_t i = 0; i < c.profile.samples.size(); ++i) {
      EXPECT_EQ(c.profile.samples[i].tick % 5, 0);
      if (i) {
        EXPECT_EQ(c.profile.samples[i].tick - c.profile.samples[i - 1].tick, 5);
      }
    }
  }
}

TEST(World, CoLocationDegradesAndSeparationRestores) {
  ResourceVector heavy = cpu(0.2);
  heavy[ResourceKind::memory] = 0.6;
  auto w = make(2, Strategy::binpack);
  w.add_container(testsupport::spec("m1", heavy, 100.0));
  w.add_container(testsupport::spec("m2", heavy, 100.0));
  auto r = w.step();
  // binpack cannot fit both on one node (1.2 > 1), so both run alone
  EXPECT_EQ(r.containers[0].throughput, 100.0);
  EXPECT_NE(r.containers[0].node, r.containers[1].node);

  auto packed = make(1);
  packed.add_container(testsupport::spec("m1", heavy, 100.0));
  packed.add_container(testsupport::spec("m2", heavy, 100.0));
  auto rp = packed.step();
  EXPECT_LT(rp.containers[0].throughput, 100.0);
}

TEST(World, SameSeedSameStream) {
  auto run = [](std::uint64_t seed) {
    auto w = make(4, Strategy::random, seed);
    for (int i = 0; i < 12; ++i) w.add_container(testsupport::spec("c" + std::to_string(i), cpu(0.3), 50.0, 20, i));
    std::vector<std::pair<NodeId, double>> out;
    for (Tick t = 0; t < 30; ++t) {
      for (const auto& c : w.step().containers) out.emplace_back(c.node, c.throughput);
    }
    return out;
  };
  EXPECT_EQ(run(6), run(6));
}
