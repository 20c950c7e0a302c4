#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace cbalancer;
using testsupport::category_of;

namespace {

StatsMessage stats(NodeId node, Tick tick) {
  StatsMessage m;
  m.node_id = node;
  m.tick = tick;
  return m;
}

Tick tick_of(const Envelope& e) { return std::get<StatsMessage>(e.payload).tick; }

}  // namespace

TEST(Topic, ParseAndName) {
  auto t = Topic::parse("M3");
  EXPECT_EQ(t.kind, Topic::Kind::stats);
  EXPECT_EQ(t.node, 3u);
  EXPECT_EQ(Topic::parse("L12").name(), "L12");
  for (const char* bad : {"", "M", "X3", "M-1", "L3a", "m3", "M 3"}) {
    EXPECT_EQ(category_of([&] { Topic::parse(bad); }), ErrorCategory::MalformedTopic) << bad;
  }
}

TEST(Bus, FifoPerTopic) {
  Bus bus;
  auto sub = bus.subscribe("M3");
  bus.publish("M3", 1, Sender::worker(3), stats(3, 1));
  bus.publish("M3", 2, Sender::worker(3), stats(3, 2));
  auto got = bus.poll(sub);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(tick_of(got[0]), 1);
  EXPECT_EQ(tick_of(got[1]), 2);
  EXPECT_TRUE(bus.poll(sub).empty());
}

TEST(Bus, TopicIsolation) {
  Bus bus;
  auto l2 = bus.subscribe("L2");
  bus.publish("M2", 0, Sender::worker(2), stats(2, 0));
  bus.publish("M5", 0, Sender::worker(5), stats(5, 0));
  EXPECT_TRUE(bus.poll(l2).empty());
  bus.publish("L2", 0, Sender::the_manager(), MigrationCommand{"c", 2, 4});
  auto got = bus.poll(l2);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(std::get<MigrationCommand>(got[0].payload).target_node, 4u);
}

TEST(Bus, FanOutAndDurability) {
  Bus bus;
  auto a = bus.subscribe("M1");
  bus.publish("M1", 0, Sender::worker(1), stats(1, 0));
  auto b = bus.subscribe("M1");  // late subscriber still sees the log
  bus.publish("M1", 5, Sender::worker(1), stats(1, 5));
  EXPECT_EQ(bus.poll(a).size(), 2u);
  EXPECT_EQ(bus.poll(b).size(), 2u);
  EXPECT_EQ(bus.message_count(), 2u);
}

TEST(Bus, WorkersCannotAddressEachOther) {
  Bus bus;
  // worker to another worker's command topic, or to someone else's stats topic
  EXPECT_EQ(category_of([&] { bus.publish("L2", 0, Sender::worker(1), MigrationCommand{"c", 1, 2}); }),
            ErrorCategory::ValidationError);
  EXPECT_EQ(category_of([&] { bus.publish("M2", 0, Sender::worker(1), stats(1, 0)); }),
            ErrorCategory::ValidationError);
  EXPECT_EQ(category_of([&] { bus.publish("M2", 0, Sender::the_manager(), stats(2, 0)); }),
            ErrorCategory::ValidationError);
  EXPECT_EQ(bus.message_count(), 0u);
}

TEST(Bus, LogIsReplayable) {
  Bus bus;
  bus.publish("M0", 0, Sender::worker(0), stats(0, 0));
  bus.publish("L0", 1, Sender::the_manager(), MigrationCommand{"redis-000", 0, 1});
  std::ostringstream os;
  bus.write_log(os);
  EXPECT_EQ(os.str(),
            "0 M0 worker0 stats node=0 tick=0 containers=0\n"
            "1 L0 manager migrate container=redis-000 host=0 target=1\n");
}
