#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cbalancer/bus.hpp"
#include "cbalancer/control_plane.hpp"
#include "cbalancer/migration.hpp"
#include "cbalancer/objective.hpp"
#include "cbalancer/scenario.hpp"
#include "cbalancer/simulator.hpp"
#include "cbalancer/text.hpp"

namespace cbalancer {

struct TickSummary {
  Tick tick = 0;
  double stability = 0.0;
  double throughput = 0.0;
  std::size_t running = 0;
  std::size_t migrating = 0;
  std::size_t network_running = 0;
  double dropped_sum = 0.0;  // over running network containers
};

struct ContainerSummary {
  std::string container_id;
  std::string class_name;
  NodeId final_node = 0;
  double bogo_ops = 0.0;
  std::size_t migrations = 0;
  Tick remaining_ticks = 0;
};

struct RoundSummary {
  Tick tick = 0;
  bool stale = false;
  std::size_t containers = 0;
  std::size_t commands = 0;
  double best_fitness = 0.0;
  double planned_stability = 0.0;  // S of the placement the round chose
};

struct RunSummary {
  double mean_stability = 0.0;
  std::size_t total_migrations = 0;
  double aggregate_bogo_ops = 0.0;
  std::uint64_t bytes_checkpoint = 0;  // compressed checkpoint bytes sent
  std::uint64_t bytes_fs = 0;
  double mean_dropped = 0.0;  // mean over ticks with running network containers
  std::size_t stale_commands = 0;
  std::size_t infeasible_placements = 0;

  std::uint64_t bytes_moved() const { return bytes_checkpoint + bytes_fs; }
};

struct RunReport {
  std::string scenario;
  Strategy strategy = Strategy::spread;
  ObjectiveWeights weights;
  std::uint64_t seed = 0;
  std::size_t nodes = 0;
  std::size_t containers = 0;
  Tick horizon = 0;
  std::vector<TickSummary> ticks;
  std::vector<RoundSummary> rounds;
  std::vector<MigrationRecord> migrations;
  std::vector<ContainerSummary> container_results;
  RunSummary summary;
};

/// Summary statistics derived from the per-tick stream and migration list.
inline RunSummary summarize(const std::vector<TickSummary>& ticks,
                            const std::vector<MigrationRecord>& migrations) {
  RunSummary s;
  double dropped = 0.0;
  std::size_t dropped_ticks = 0;
  for (const auto& t : ticks) {
    s.mean_stability += t.stability;
    s.aggregate_bogo_ops += t.throughput;
    if (t.network_running > 0) {
      dropped += t.dropped_sum / static_cast<double>(t.network_running);
      ++dropped_ticks;
    }
  }
  if (!ticks.empty()) s.mean_stability /= static_cast<double>(ticks.size());
  s.mean_dropped = dropped_ticks ? dropped / static_cast<double>(dropped_ticks) : 0.0;
  s.total_migrations = migrations.size();
  for (const auto& m : migrations) {
    s.bytes_checkpoint += m.bytes_checkpoint_compressed;
    s.bytes_fs += m.bytes_fs_transferred;
  }
  return s;
}

inline World make_world(const Scenario& sc) {
  WorldConfig cfg;
  for (std::size_t n = 0; n < sc.node_count; ++n) {
    cfg.nodes.push_back(NodeSpec{static_cast<NodeId>(n), sc.capacity});
  }
  cfg.contention = sc.contention;
  cfg.strategy = sc.strategy;
  cfg.profiling_interval = sc.profiling_interval;
  cfg.seed = sc.seed;
  World world(cfg);
  for (const auto& [name, _] : sc.images) world.add_image(sc.manifest(name));
  for (const auto& ref : sc.registry_preload) push(world.images.at(ref), world.registry);
  for (const auto& spec : sc.containers()) world.add_container(spec);
  return world;
}

struct RunOptions {
  Bus* bus_out = nullptr;             // receives the run's bus (for logging)
  RegistryState* registry_out = nullptr;
};

/// Runs the tick loop for the scenario's strategy; `cbalancer` additionally
/// drives the manager/worker loop over the bus.
inline RunReport run(const Scenario& sc, const RunOptions& opts = {}) {
  sc.validate();
  World world = make_world(sc);
  const bool rebalance = sc.strategy == Strategy::cbalancer;

  Bus bus;
  std::vector<Worker> workers;
  ManagerConfig mcfg;
  mcfg.ga = sc.ga;
  mcfg.ga.weights = sc.weights;
  mcfg.ga.seed = sc.effective_ga_seed();
  mcfg.invoke_every = sc.invoke_every;
  mcfg.first_round = sc.first_round;
  mcfg.profiling_interval = sc.profiling_interval;
  if (rebalance) {
    mcfg.validate(sc.worst_case_migration_seconds());
    for (NodeId x = 0; x < sc.node_count; ++x) workers.emplace_back(x, bus, sc.profiling_interval);
  }
  Manager manager(mcfg, bus, rebalance ? sc.node_count : 0);

  RunReport report;
  report.scenario = sc.name;
  report.strategy = sc.strategy;
  report.weights = sc.weights;
  report.seed = sc.seed;
  report.nodes = sc.node_count;
  report.containers = world.containers.size();
  report.horizon = sc.effective_horizon();

  for (Tick t = 0; t < report.horizon; ++t) {
    for (auto& w : workers) {
      for (auto& rec : w.handle_commands(world, bus, sc.migration)) {
        report.migrations.push_back(std::move(rec));
      }
    }
    const TickReport tr = world.step();
    TickSummary ts;
    ts.tick = tr.tick;
    ts.stability = tr.stability;
    ts.throughput = tr.total_throughput();
    ts.running = tr.containers.size();
    for (const auto& c : world.containers) {
      if (c.status == ContainerStatus::migrating) ++ts.migrating;
    }
    for (const auto& c : tr.containers) {
      if (c.network) {
        ++ts.network_running;
        ts.dropped_sum += c.dropped_fraction;
      }
    }
    report.ticks.push_back(ts);

    if (rebalance) {
      for (const auto& w : workers) w.maybe_publish_stats(world, t, bus);
      manager.ingest(bus);
      if (manager.due(t)) {
        auto outcome = manager.run_round(t, bus);
        RoundSummary rs;
        rs.tick = t;
        rs.stale = outcome.stale;
        rs.containers = outcome.containers_considered;
        rs.commands = outcome.commands.size();
        if (outcome.optimization) {
          rs.best_fitness = outcome.optimization->best_breakdown.fitness;
          rs.planned_stability = outcome.optimization->best_breakdown.stability_raw;
        }
        report.rounds.push_back(rs);
      }
    }
  }

  for (const auto& c : world.containers) {
    report.container_results.push_back({c.spec.container_id, c.spec.class_name,
                                        c.status == ContainerStatus::migrating ? c.migration_target : c.host,
                                        c.work_done, c.migration_count, c.remaining_ticks});
  }
  report.summary = summarize(report.ticks, report.migrations);
  for (const auto& w : workers) report.summary.stale_commands += w.stale_commands();
  report.summary.infeasible_placements = world.infeasible_placements;
  if (opts.bus_out) *opts.bus_out = bus;
  if (opts.registry_out) *opts.registry_out = world.registry;
  return report;
}

// Report format: one record per line, `<kind> key=value ...`, stable field order.
inline void write_report(const RunReport& r, std::ostream& os) {
  using text::real;
  os << "# cbalancer run report v1\n";
  os << "run scenario=" << r.scenario << " strategy=" << strategy_name(r.strategy)
     << " alpha=" << real(r.weights.alpha) << " convention=" << convention_name(r.weights.convention)
     << " seed=" << r.seed << " nodes=" << r.nodes << " containers=" << r.containers
     << " horizon=" << r.horizon << '\n';
  for (const auto& t : r.ticks) {
    os << "tick t=" << t.tick << " S=" << real(t.stability) << " throughput=" << real(t.throughput)
       << " running=" << t.running << " migrating=" << t.migrating
       << " net_running=" << t.network_running << " dropped_sum=" << real(t.dropped_sum) << '\n';
  }
  for (const auto& rd : r.rounds) {
    os << "round t=" << rd.tick << " stale=" << (rd.stale ? 1 : 0) << " containers=" << rd.containers
       << " commands=" << rd.commands << " best_fitness=" << real(rd.best_fitness)
       << " planned_S=" << real(rd.planned_stability) << '\n';
  }
  for (const auto& m : r.migrations) {
    os << "migration container=" << m.container_id << " source=" << m.source << " target=" << m.target
       << " approach=" << static_cast<int>(m.approach) << " start=" << m.start_tick
       << " resume=" << m.resume_tick << " total_s=" << real(m.total_time)
       << " downtime_s=" << real(m.downtime) << " ckpt_raw=" << m.bytes_checkpoint_raw
       << " ckpt_compressed=" << m.bytes_checkpoint_compressed << " fs_bytes=" << m.bytes_fs_transferred
       << " phases=";
    for (std::size_t i = 0; i < m.phases.size(); ++i) {
      if (i) os << ',';
      os << phase_name(m.phases[i].phase) << ':' << real(m.phases[i].seconds);
    }
    os << '\n';
  }
  for (const auto& c : r.container_results) {
    os << "container id=" << c.container_id << " class=" << c.class_name << " node=" << c.final_node
       << " bogo_ops=" << real(c.bogo_ops) << " migrations=" << c.migrations
       << " remaining=" << c.remaining_ticks << '\n';
  }
  const auto& s = r.summary;
  os << "summary mean_S=" << real(s.mean_stability) << " total_migrations=" << s.total_migrations
     << " aggregate_bogo_ops=" << real(s.aggregate_bogo_ops) << " bytes_checkpoint=" << s.bytes_checkpoint
     << " bytes_fs=" << s.bytes_fs << " mean_dropped=" << real(s.mean_dropped)
     << " stale_commands=" << s.stale_commands << " infeasible_placements=" << s.infeasible_placements
     << '\n';
}

inline std::string report_text(const RunReport& r) {
  std::ostringstream os;
  write_report(r, os);
  return os.str();
}

struct SweepRow {
  double alpha = 0.0;
  double mean_stability = 0.0;
  double planned_stability = 0.0;  // mean over non-stale rounds
  std::size_t migrations = 0;
  double migrations_norm = 0.0;
  bool is_default = false;
};

inline constexpr double kDefaultAlpha = 0.85;

/// One cbalancer run per alpha (same seed), sorted by alpha.
inline std::vector<SweepRow> alpha_sweep(Scenario sc, std::vector<double> alphas) {
  for (double a : alphas) {
    if (a < 0.0 || a > 1.0) fail(ErrorCategory::ValidationError, "alpha " + text::real(a) + " outside [0,1]");
  }
  std::sort(alphas.begin(), alphas.end());
  std::vector<SweepRow> rows;
  sc.strategy = Strategy::cbalancer;
  for (double a : alphas) {
    sc.weights.alpha = a;
    const auto rep = run(sc);
    double planned = 0.0;
    std::size_t n = 0;
    for (const auto& rd : rep.rounds) {
      if (rd.stale) continue;
      planned += rd.planned_stability;
      ++n;
    }
    rows.push_back({a, rep.summary.mean_stability, n ? planned / static_cast<double>(n) : 0.0,
                    rep.summary.total_migrations, 0.0, a == kDefaultAlpha});
  }
  if (!rows.empty()) {
    std::vector<double> m;
    for (const auto& r : rows) m.push_back(static_cast<double>(r.migrations));
    const auto norm = normalize_population(m);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].migrations_norm = norm[i];
  }
  return rows;
}

inline void write_sweep(const Scenario& sc, const std::vector<SweepRow>& rows, std::ostream& os) {
  using text::real;
  os << "# cbalancer alpha sweep v1\n";
  os << "sweep scenario=" << sc.name << " convention=" << convention_name(sc.weights.convention)
     << " seed=" << sc.seed << '\n';
  os << "alpha mean_S planned_S migrations migrations_norm default\n";
  for (const auto& r : rows) {
    os << real(r.alpha) << ' ' << real(r.mean_stability) << ' ' << real(r.planned_stability) << ' '
       << r.migrations << ' '
       << real(r.migrations_norm) << ' ' << (r.is_default ? "*" : "-") << '\n';
  }
}

struct CompareRow {
  Strategy strategy = Strategy::spread;
  RunSummary summary;
};

inline std::vector<CompareRow> compare(Scenario sc, const std::vector<Strategy>& strategies) {
  if (strategies.size() < 2) fail(ErrorCategory::ValidationError, "compare needs at least two strategies");
  std::vector<CompareRow> rows;
  for (auto s : strategies) {
    sc.strategy = s;
    rows.push_back({s, run(sc).summary});
  }
  return rows;
}

/// Percent change of `v` against `base`; empty when the base is zero and v is not.
inline std::optional<double> percent_delta(double v, double base) {
  if (base == 0.0) return v == 0.0 ? std::optional<double>(0.0) : std::nullopt;
  return (v - base) / base * 100.0;
}

inline void write_compare(const Scenario& sc, const std::vector<CompareRow>& rows, std::ostream& os) {
  using text::real;
  auto pct = [](std::optional<double> d) { return d ? real(*d) : std::string("n/a"); };
  os << "# cbalancer strategy comparison v1\n";
  os << "# reference (14-node hardware testbed): up to 58% throughput gain, 61% mean S reduction; "
        "not expected at simulator scale\n";
  os << "compare scenario=" << sc.name << " alpha=" << real(sc.weights.alpha)
     << " convention=" << convention_name(sc.weights.convention) << " seed=" << sc.seed << '\n';
  os << "strategy aggregate_bogo_ops mean_S migrations bytes_moved mean_dropped "
        "delta_bogo_pct delta_S_pct delta_migrations_pct delta_bytes_pct\n";
  const auto& base = rows.front().summary;
  for (const auto& r : rows) {
    const auto& s = r.summary;
    os << strategy_name(r.strategy) << ' ' << real(s.aggregate_bogo_ops) << ' ' << real(s.mean_stability)
       << ' ' << s.total_migrations << ' ' << s.bytes_moved() << ' ' << real(s.mean_dropped) << ' '
       << pct(percent_delta(s.aggregate_bogo_ops, base.aggregate_bogo_ops)) << ' '
       << pct(percent_delta(s.mean_stability, base.mean_stability)) << ' '
       << pct(percent_delta(static_cast<double>(s.total_migrations), static_cast<double>(base.total_migrations)))
       << ' '
       << pct(percent_delta(static_cast<double>(s.bytes_moved()), static_cast<double>(base.bytes_moved())))
       << '\n';
  }
}

inline void write_validation(const Scenario& sc, std::ostream& os) {
  os << "valid scenario=" << sc.name << " nodes=" << sc.node_count << " containers=" << sc.containers().size()
     << " classes=" << sc.classes.size() << " images=" << sc.images.size()
     << " strategy=" << strategy_name(sc.strategy) << " horizon=" << sc.effective_horizon()
     << " worst_migration_s=" << text::real(sc.worst_case_migration_seconds()) << '\n';
}

}  // namespace cbalancer
