#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cbalancer/bus.hpp"
#include "cbalancer/error.hpp"
#include "cbalancer/ga.hpp"
#include "cbalancer/migration.hpp"
#include "cbalancer/simulator.hpp"

namespace cbalancer {

/// Worker side: stats producer, result consumer and migration module of one node.
class Worker {
 public:
  Worker(NodeId node, const Bus& bus, Tick profiling_interval)
      : node_(node), interval_(profiling_interval), commands_(bus.subscribe(Topic::commands(node))) {
    if (interval_ < 1) fail(ErrorCategory::InvalidConfig, "profiling interval must be >= 1");
  }

  NodeId node() const { return node_; }
  std::size_t stale_commands() const { return stale_; }

  /// Publishes a StatsMessage on M<node> when `tick` falls on the profiling cadence.
  bool maybe_publish_stats(const World& world, Tick tick, Bus& bus) const {
    if (tick % interval_ != 0) return false;
    StatsMessage msg;
    msg.node_id = node_;
    msg.tick = tick;
    for (const auto& c : world.containers) {
      if (c.host != node_) continue;
      if (c.running()) {
        msg.containers.push_back(
            {c.spec.container_id, c.spec.image_ref, c.spec.demand, c.delivered});
      } else if (c.status == ContainerStatus::migrating) {
        msg.migrating.push_back(c.spec.container_id);
      }
    }
    bus.publish(Topic::stats(node_), tick, Sender::worker(node_), std::move(msg));
    return true;
  }

  /// Executes every command queued on L<node>. Commands naming a container
  /// that is not running here any more are dropped.
  std::vector<MigrationRecord> handle_commands(World& world, const Bus& bus,
                                               const MigrationSettings& settings) {
    std::vector<MigrationRecord> done;
    for (const auto& env : bus.poll(commands_)) {
      const auto& cmd = std::get<MigrationCommand>(env.payload);
      const ContainerState* c = world.find(cmd.container_id);
      if (!c || !c->running() || c->host != node_ || cmd.host_node != node_ ||
          cmd.target_node == node_) {
        ++stale_;
        continue;
      }
      done.push_back(migrate_container(world, cmd.container_id, cmd.target_node, settings));
    }
    return done;
  }

 private:
  NodeId node_;
  Tick interval_;
  Bus::Subscription commands_;
  std::size_t stale_ = 0;
};

struct ManagerConfig {
  GaConfig ga;
  Tick invoke_every = 60;
  Tick first_round = 5;
  Tick profiling_interval = 5;

  /// Rebalancing more often than a migration takes destabilizes the cluster.
  void validate(double max_migration_seconds) const {
    ga.validate();
    if (profiling_interval < 1) fail(ErrorCategory::InvalidConfig, "profiling interval must be >= 1");
    if (first_round < 0) fail(ErrorCategory::InvalidConfig, "first_round must be >= 0");
    const auto floor_ticks = static_cast<Tick>(std::ceil(max_migration_seconds - 1e-9));
    if (invoke_every < 1 || invoke_every < floor_ticks) {
      fail(ErrorCategory::InvalidConfig,
           "invoke_every=" + std::to_string(invoke_every) + " ticks is below the longest expected migration (" +
               std::to_string(floor_ticks) + " ticks)");
    }
  }
};

struct RoundOutcome {
  Tick tick = 0;
  bool stale = false;
  std::size_t nodes_considered = 0;
  std::size_t containers_considered = 0;
  std::vector<MigrationCommand> commands;
  std::optional<OptimizationResult> optimization;
};

/// Manager side: stats consumer, optimizer and result producer.
class Manager {
 public:
  Manager(ManagerConfig cfg, const Bus& bus, std::size_t node_count) : cfg_(std::move(cfg)) {
    for (NodeId x = 0; x < node_count; ++x) stats_subs_.push_back(bus.subscribe(Topic::stats(x)));
  }

  const ManagerConfig& config() const { return cfg_; }

  bool due(Tick tick) const {
    return tick >= cfg_.first_round && (tick - cfg_.first_round) % cfg_.invoke_every == 0;
  }

  void ingest(const Bus& bus) {
    for (auto& sub : stats_subs_) {
      for (auto& env : bus.poll(sub)) {
        auto& msg = std::get<StatsMessage>(env.payload);
        latest_[msg.node_id] = msg;
      }
    }
  }

  /// One optimizer round over the freshest stats. Skipped (stale=true) when
  /// no node reported within two profiling intervals.
  RoundOutcome run_round(Tick tick, Bus& bus) {
    RoundOutcome out;
    out.tick = tick;
    const Tick window = 2 * cfg_.profiling_interval;

    std::vector<const StatsMessage*> fresh;
    for (const auto& [node, msg] : latest_) {
      if (tick - msg.tick <= window) fresh.push_back(&msg);
    }
    if (fresh.empty()) {
      out.stale = true;
      return out;
    }

    std::set<std::string> in_flight;
    for (const auto* msg : fresh) in_flight.insert(msg->migrating.begin(), msg->migrating.end());
    for (const auto& [id, issued] : pending_) {
      const auto host = latest_.find(issued.host_node);
      if (host == latest_.end() || host->second.tick <= issued.tick) in_flight.insert(id);
    }

    std::vector<NodeSpec> nodes;
    std::vector<NodeId> real_id;
    std::vector<ContainerProfile> profiles;
    std::map<std::string, NodeId> host_of;
    for (const auto* msg : fresh) {
      const auto local = static_cast<NodeId>(nodes.size());
      nodes.push_back(NodeSpec{local, ResourceVector::filled(1.0)});
      real_id.push_back(msg->node_id);
      for (const auto& c : msg->containers) {
        if (in_flight.count(c.container_id)) continue;
        profiles.push_back({c.container_id, {{msg->tick, c.utilization}}, local});
        host_of[c.container_id] = msg->node_id;
      }
    }
    out.nodes_considered = nodes.size();
    out.containers_considered = profiles.size();

    const auto snapshot = build_snapshot(std::move(profiles), std::move(nodes), tick);
    GaConfig ga = cfg_.ga;
    ga.seed = cfg_.ga.seed + rounds_;
    ++rounds_;
    auto result = optimize(snapshot, ga);

    for (const auto& mv : result.migrations) {
      MigrationCommand cmd{mv.container_id, real_id[mv.source], real_id[mv.target]};
      bus.publish(Topic::commands(cmd.host_node), tick, Sender::the_manager(), cmd);
      pending_[cmd.container_id] = Issued{cmd.host_node, tick};
      out.commands.push_back(std::move(cmd));
    }
    out.optimization = std::move(result);
    prune_pending();
    return out;
  }

 private:
  struct Issued {
    NodeId host_node;
    Tick tick;
  };

  // A command is settled once its host has reported after issuing it.
  void prune_pending() {
    for (auto it = pending_.begin(); it != pending_.end();) {
      auto host = latest_.find(it->second.host_node);
      const bool host_reported = host != latest_.end() && host->second.tick > it->second.tick;
      const bool still_leaving =
          host_reported && std::count(host->second.migrating.begin(), host->second.migrating.end(),
                                      it->first) > 0;
      if (host_reported && !still_leaving) it = pending_.erase(it);
      else ++it;
    }
  }

  ManagerConfig cfg_;
  std::vector<Bus::Subscription> stats_subs_;
  std::map<NodeId, StatsMessage> latest_;
  std::map<std::string, Issued> pending_;
  std::uint64_t rounds_ = 0;
};

}  // namespace cbalancer
