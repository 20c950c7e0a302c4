#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cbalancer/error.hpp"
#include "cbalancer/model.hpp"
#include "cbalancer/text.hpp"

namespace cbalancer {

// "M<x>": worker x -> manager stats.  "L<x>": manager -> worker x commands.
struct Topic {
  enum class Kind { stats, commands };
  Kind kind = Kind::stats;
  NodeId node = 0;

  static Topic stats(NodeId x) { return {Kind::stats, x}; }
  static Topic commands(NodeId x) { return {Kind::commands, x}; }

  static Topic parse(std::string_view name) {
    if (name.size() < 2 || (name[0] != 'M' && name[0] != 'L')) {
      fail(ErrorCategory::MalformedTopic, "malformed topic '" + std::string(name) + "'");
    }
    for (char ch : name.substr(1)) {
      if (!std::isdigit(static_cast<unsigned char>(ch))) {
        fail(ErrorCategory::MalformedTopic, "malformed topic '" + std::string(name) + "'");
      }
    }
    auto x = text::parse_int(name.substr(1));
    if (!x || *x < 0 || *x > 0xffffffffLL) {
      fail(ErrorCategory::MalformedTopic, "malformed topic '" + std::string(name) + "'");
    }
    return {name[0] == 'M' ? Kind::stats : Kind::commands, static_cast<NodeId>(*x)};
  }

  std::string name() const { return (kind == Kind::stats ? "M" : "L") + std::to_string(node); }

  friend auto operator<=>(const Topic&, const Topic&) = default;
};

struct ContainerStats {
  std::string container_id;
  std::string image_ref;
  ResourceVector allocated;  // declared demand
  ResourceVector utilization;
};

struct StatsMessage {
  NodeId node_id = 0;
  Tick tick = 0;
  std::vector<ContainerStats> containers;
  std::vector<std::string> migrating;  // outgoing migrations still in flight
};

struct MigrationCommand {
  std::string container_id;
  NodeId host_node = 0;
  NodeId target_node = 0;
};

using Payload = std::variant<StatsMessage, MigrationCommand>;

/// Who is publishing. Workers are identified by node id.
struct Sender {
  bool manager = false;
  NodeId node = 0;

  static Sender the_manager() { return {true, 0}; }
  static Sender worker(NodeId x) { return {false, x}; }
};

struct Envelope {
  Topic topic;
  Tick tick = 0;
  Sender sender;
  Payload payload;
};

inline std::string format_payload(const Payload& p) {
  std::string out;
  if (const auto* s = std::get_if<StatsMessage>(&p)) {
    out = "stats node=" + std::to_string(s->node_id) + " tick=" + std::to_string(s->tick) +
          " containers=" + std::to_string(s->containers.size());
    for (const auto& c : s->containers) {
      out += " [" + c.container_id + " " + c.image_ref;
      for (auto r : kAllResources) out += " " + std::string(resource_name(r)) + "=" + text::real(c.utilization[r]);
      out += "]";
    }
    for (const auto& m : s->migrating) out += " migrating=" + m;
  } else {
    const auto& c = std::get<MigrationCommand>(p);
    out = "migrate container=" + c.container_id + " host=" + std::to_string(c.host_node) +
          " target=" + std::to_string(c.target_node);
  }
  return out;
}

/// In-process broker: per-topic durable FIFO logs, independent cursors per
/// subscriber (every subscriber sees every message).
class Bus {
 public:
  struct Subscription {
    Topic topic;
    std::size_t offset = 0;
  };

  void publish(const Topic& topic, Tick tick, const Sender& sender, Payload payload) {
    const bool ok = topic.kind == Topic::Kind::commands
                        ? sender.manager && std::holds_alternative<MigrationCommand>(payload)
                        : !sender.manager && sender.node == topic.node &&
                              std::holds_alternative<StatsMessage>(payload);
    if (!ok) {
      fail(ErrorCategory::ValidationError, "sender may not publish this payload to " + topic.name());
    }
    auto& log = topics_[topic];
    log.push_back(Envelope{topic, tick, sender, std::move(payload)});
    journal_.push_back({topic, log.size() - 1});
  }

  void publish(std::string_view topic, Tick tick, const Sender& sender, Payload payload) {
    publish(Topic::parse(topic), tick, sender, std::move(payload));
  }

  Subscription subscribe(const Topic& topic) const { return {topic, 0}; }
  Subscription subscribe(std::string_view topic) const { return subscribe(Topic::parse(topic)); }

  /// Messages published since the last poll, oldest first.
  std::vector<Envelope> poll(Subscription& sub) const {
    std::vector<Envelope> out;
    auto it = topics_.find(sub.topic);
    if (it == topics_.end()) return out;
    for (; sub.offset < it->second.size(); ++sub.offset) out.push_back(it->second[sub.offset]);
    return out;
  }

  std::size_t message_count() const { return journal_.size(); }

  /// Every publication in publish order.
  std::vector<Envelope> history() const {
    std::vector<Envelope> out;
    out.reserve(journal_.size());
    for (const auto& [topic, idx] : journal_) out.push_back(topics_.at(topic)[idx]);
    return out;
  }

  /// `<tick> <topic> <sender> <payload>` per line.
  void write_log(std::ostream& os) const {
    for (const auto& e : history()) {
      os << e.tick << ' ' << e.topic.name() << ' '
         << (e.sender.manager ? std::string("manager") : "worker" + std::to_string(e.sender.node))
         << ' ' << format_payload(e.payload) << '\n';
    }
  }

 private:
  std::map<Topic, std::vector<Envelope>> topics_;
  std::vector<std::pair<Topic, std::size_t>> journal_;
};

}  // namespace cbalancer
