#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace cbalancer;
using testsupport::cpu;

TEST(DeliveredShare, Examples) {
  std::vector<double> under = {0.3, 0.3};
  EXPECT_EQ(delivered_share(under, 1.0), (std::vector<double>{0.3, 0.3}));
  std::vector<double> over = {0.8, 0.8};
  EXPECT_EQ(delivered_share(over, 1.0), (std::vector<double>{0.5, 0.5}));
}

TEST(DeliveredShare, NeverExceedsCapacity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 0.9);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> d(1 + rng() % 8);
    for (auto& x : d) x = u(rng);
    const double cap = 0.2 + u(rng);
    double sum = 0.0;
    auto out = delivered_share(d, cap);
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_LE(out[i], d[i] + 1e-15);
      sum += out[i];
    }
    EXPECT_LE(sum, cap + 1e-12);
  }
}

TEST(ContainerThroughput, SoleContainerIsUncontended) {
  auto s = testsupport::spec("a", cpu(0.4), 250.0);
  EXPECT_EQ(container_throughput(s, s.demand, ResourceVector{}, ContentionParams{}), 250.0);
}

TEST(ContainerThroughput, TwoHeavyCpuContainers) {
  auto s = testsupport::spec("a", cpu(0.8), 100.0);
  std::vector<double> demands = {0.8, 0.8};
  const double share = delivered_share(demands, 1.0)[0];
  ResourceVector total = cpu(1.6);
  const double thr = container_throughput(s, cpu(share), overcommit(total, ResourceVector::filled(1.0)),
                                          ContentionParams{});
  // share 0.5/0.8 = 0.625, overcommit 0.6, penalty 1/(1+0.1*0.6)
  EXPECT_NEAR(thr, 100.0 * 0.625 / 1.06, 1e-12);
  EXPECT_NEAR(thr / 100.0, 0.5896, 5e-5);
}

TEST(ContainerThroughput, DefaultGammaOrdering) {
  const auto& g = ContentionParams{}.interference_gamma;
  EXPECT_LT(g[ResourceKind::cpu], g[ResourceKind::cache]);
  EXPECT_LT(g[ResourceKind::cpu], g[ResourceKind::memory]);
  EXPECT_LT(g[ResourceKind::cpu], g[ResourceKind::network]);
}

TEST(ContainerThroughput, DegradationMonotoneInReplicas) {
  const auto sc = testsupport::preset_scenario("");
  for (const auto& [name, _] : sc.classes) {
    double prev = testsupport::colocated_throughput(sc, name, 1);
    EXPECT_EQ(prev, sc.classes.at(name).base_throughput) << name;
    for (std::size_t k = 2; k <= 7; ++k) {
      const double t = testsupport::colocated_throughput(sc, name, k);
      EXPECT_LE(t, prev) << name << " at " << k;
      prev = t;
    }
  }
}

TEST(ContainerThroughput, MemoryStressorsSufferMoreThanCpuStressors) {
  const auto sc = testsupport::preset_scenario("");
  auto loss = [&](const std::string& cls) {
    return 1.0 - testsupport::colocated_throughput(sc, cls, 7) / sc.classes.at(cls).base_throughput;
  };
  EXPECT_GT(loss("stream"), 0.5);
  EXPECT_GT(loss("vm50mb"), 0.5);
  EXPECT_LT(loss("pi"), 0.15);
  EXPECT_LT(loss("rgb"), 0.15);
}

TEST(DroppedFraction, NetworkOnly) {
  ResourceVector net;
  net[ResourceKind::network] = 0.25;
  auto s = testsupport::spec("iperf", net);
  ResourceVector oc;
  EXPECT_EQ(dropped_fraction(s, oc), 0.0);
  oc[ResourceKind::network] = 0.5;
  EXPECT_NEAR(dropped_fraction(s, oc), 0.5 / 1.5, 1e-15);
  EXPECT_EQ(dropped_fraction(testsupport::spec("cpu", cpu(0.5)), oc), 0.0);
}
