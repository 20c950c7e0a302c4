#include <gtest/gtest.h>

#include "support.hpp"

using namespace cbalancer;
using testsupport::category_of;

namespace {

Scenario parse(const std::string& text) {
  return parse_scenario(text, testsupport::scenario_path("inline.conf"));
}

const char* kMinimal =
    "[cluster]\nnodes = 1\n"
    "[image busybox]\nlayer = busybox-rootfs 1MB\n"
    "[class sleeper]\nimage = busybox\ndemand = cpu:0.1\nbase_throughput = 100\n"
    "[workload]\nlaunch = sleeper duration=10\n";

}  // namespace

TEST(Scenario, MinimalFileIsValid) {
  auto sc = load_scenario(testsupport::scenario_path("minimal.conf"));
  EXPECT_EQ(sc.node_count, 1u);
  ASSERT_EQ(sc.containers().size(), 1u);
  EXPECT_EQ(sc.containers()[0].container_id, "sleeper-000");
  EXPECT_EQ(sc.effective_horizon(), 10);
}

TEST(Scenario, DefaultsApplied) {
  auto sc = parse(kMinimal);
  EXPECT_EQ(sc.weights.alpha, 0.85);
  EXPECT_EQ(sc.weights.convention, AlphaConvention::formula);
  EXPECT_EQ(sc.ga.population_size, 200u);
  EXPECT_EQ(sc.ga.generations, 300u);
  EXPECT_EQ(sc.ga.elitism_count, 4u);
  EXPECT_EQ(sc.profiling_interval, 5);
  EXPECT_EQ(sc.invoke_every, 60);
  EXPECT_EQ(sc.migration.checkpoint.base_bytes, 2u * 1024 * 1024);
  EXPECT_EQ(sc.migration.link_bandwidth, 125e6);
  EXPECT_EQ(sc.images.at("busybox").init_bytes, 1024u * 1024);
}

TEST(Scenario, UndefinedImageRejected) {
  EXPECT_EQ(category_of([] {
              parse("[cluster]\nnodes = 1\n[class x]\nimage = nope\ndemand = cpu:0.1\n"
                    "[workload]\nlaunch = x\n");
            }),
            ErrorCategory::ValidationError);
}

TEST(Scenario, VolumesRejected) {
  EXPECT_EQ(category_of([] { parse(std::string(kMinimal) + "[class sleeper]\nvolume = /data\n"); }),
            ErrorCategory::ValidationError);
}

TEST(Scenario, ParseErrorsNameLineAndField) {
  try {
    parse("[cluster]\nnodes = 1\nnodez = 3\n");
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::ParseError);
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("nodez"), std::string::npos) << e.what();
  }
  EXPECT_EQ(category_of([] { parse("[cluster]\nnodes = many\n"); }), ErrorCategory::ParseError);
  EXPECT_EQ(category_of([] { parse("nodes = 1\n"); }), ErrorCategory::ParseError);
  EXPECT_EQ(category_of([] { parse("[cluster\n"); }), ErrorCategory::ParseError);
  EXPECT_EQ(category_of([] { parse("[class x]\ndemand = gpu:1\n"); }), ErrorCategory::ParseError);
  EXPECT_EQ(category_of([] { parse(std::string(kMinimal) + "launch = sleeper speed=3\n"); }),
            ErrorCategory::ParseError);
  EXPECT_EQ(category_of([] { load_scenario("/nonexistent/x.conf"); }), ErrorCategory::IoError);
}

TEST(Scenario, ValidationErrors) {
  EXPECT_EQ(category_of([] { parse(std::string(kMinimal) + "launch = sleeper replicas=0\n"); }),
            ErrorCategory::ValidationError);
  EXPECT_EQ(category_of([] { parse(std::string(kMinimal) + "[objective]\nalpha = 1.5\n"); }),
            ErrorCategory::ValidationError);
  EXPECT_EQ(category_of([] { parse(std::string(kMinimal) + "[workload]\nlaunch = ghost\n"); }),
            ErrorCategory::ValidationError);
}

TEST(Scenario, W1Fixture) {
  auto sc = load_scenario(testsupport::scenario_path("w01.conf"));
  EXPECT_EQ(sc.node_count, 14u);
  const auto cs = sc.containers();
  ASSERT_EQ(cs.size(), 28u);
  const std::vector<std::string> order = {"rgb", "bsearch4m", "rgb", "bsearch4m"};
  for (std::size_t g = 0; g < 4; ++g) {
    for (std::size_t r = 0; r < 7; ++r) {
      const auto& c = cs[g * 7 + r];
      EXPECT_EQ(c.class_name, order[g]);
      EXPECT_EQ(c.duration_ticks, 120);
      EXPECT_EQ(c.arrival_tick, static_cast<Tick>(g));
    }
  }
  EXPECT_EQ(cs[14].container_id, "rgb-007");
  std::set<std::string> ids;
  for (const auto& c : cs) ids.insert(c.container_id);
  EXPECT_EQ(ids.size(), cs.size());
}

TEST(Scenario, AllBundledScenariosLoad) {
  for (const auto& entry : std::filesystem::directory_iterator(testsupport::source_dir() / "scenarios")) {
    if (entry.path().extension() != ".conf") continue;
    EXPECT_NO_THROW(load_scenario(entry.path())) << entry.path();
  }
}

TEST(Scenario, ByteSizesAndResources) {
  EXPECT_EQ(text::parse_bytes("2MiB"), 2u * 1024 * 1024);
  EXPECT_EQ(text::parse_bytes("100MB"), 100u * 1000 * 1000);
  EXPECT_EQ(text::parse_bytes("512"), 512u);
  EXPECT_FALSE(text::parse_bytes("12 parsecs"));
  auto sc = testsupport::preset_scenario("");
  EXPECT_EQ(sc.classes.at("iperf100m").demand[ResourceKind::network], 0.25);
  EXPECT_EQ(sc.images.at("stress-ng").layers[0].second, 120u * 1000 * 1000);
}
