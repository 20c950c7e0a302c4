#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cbalancer/error.hpp"
#include "cbalancer/model.hpp"
#include "cbalancer/registry.hpp"
#include "cbalancer/simulator.hpp"
#include "cbalancer/text.hpp"

namespace cbalancer {

// The seven protocol steps; file-system sync is split into its two halves.
enum class MigrationStep {
  InitiateRequest,
  CreateCheckpoint,
  CompressCheckpoint,
  TransferCheckpoint,
  SyncFileSystem,
  TransferModifiedFs,
  CreateContainer,
  RestoreContainer,
};

// Individually timed operations. Each belongs to exactly one MigrationStep.
enum class MigrationPhase {
  InitiateRequest,
  CreateCheckpoint,
  CompressCheckpoint,
  CommitFileSystem,    // approach 2
  PushImage,           // approach 2
  ExportFileSystem,    // approach 1
  TransferCheckpoint,
  TransferFileSystem,  // approach 1
  ExtractCheckpoint,
  PullImage,           // approach 2
  ImportFileSystem,    // approach 1
  CreateContainer,
  RestoreContainer,
};

inline constexpr std::array<MigrationPhase, 13> kAllPhases = {
    MigrationPhase::InitiateRequest,    MigrationPhase::CreateCheckpoint,
    MigrationPhase::CompressCheckpoint, MigrationPhase::CommitFileSystem,
    MigrationPhase::PushImage,          MigrationPhase::ExportFileSystem,
    MigrationPhase::TransferCheckpoint, MigrationPhase::TransferFileSystem,
    MigrationPhase::ExtractCheckpoint,  MigrationPhase::PullImage,
    MigrationPhase::ImportFileSystem,   MigrationPhase::CreateContainer,
    MigrationPhase::RestoreContainer};

constexpr std::string_view phase_name(MigrationPhase p) {
  switch (p) {
    case MigrationPhase::InitiateRequest: return "initiate_request";
    case MigrationPhase::CreateCheckpoint: return "create_checkpoint";
    case MigrationPhase::CompressCheckpoint: return "compress_checkpoint";
    case MigrationPhase::CommitFileSystem: return "commit_file_system";
    case MigrationPhase::PushImage: return "push_image";
    case MigrationPhase::ExportFileSystem: return "export_file_system";
    case MigrationPhase::TransferCheckpoint: return "transfer_checkpoint";
    case MigrationPhase::TransferFileSystem: return "transfer_file_system";
    case MigrationPhase::ExtractCheckpoint: return "extract_checkpoint";
    case MigrationPhase::PullImage: return "pull_image";
    case MigrationPhase::ImportFileSystem: return "import_file_system";
    case MigrationPhase::CreateContainer: return "create_container";
    case MigrationPhase::RestoreContainer: return "restore_container";
  }
  return "?";
}

inline std::optional<MigrationPhase> parse_phase(std::string_view name) {
  for (auto p : kAllPhases) {
    if (phase_name(p) == name) return p;
  }
  return std::nullopt;
}

constexpr MigrationStep step_of(MigrationPhase p) {
  switch (p) {
    case MigrationPhase::InitiateRequest: return MigrationStep::InitiateRequest;
    case MigrationPhase::CreateCheckpoint: return MigrationStep::CreateCheckpoint;
    case MigrationPhase::CompressCheckpoint:
    case MigrationPhase::ExtractCheckpoint: return MigrationStep::CompressCheckpoint;
    case MigrationPhase::TransferCheckpoint: return MigrationStep::TransferCheckpoint;
    case MigrationPhase::CommitFileSystem:
    case MigrationPhase::PushImage:
    case MigrationPhase::ExportFileSystem: return MigrationStep::SyncFileSystem;
    case MigrationPhase::TransferFileSystem:
    case MigrationPhase::PullImage:
    case MigrationPhase::ImportFileSystem: return MigrationStep::TransferModifiedFs;
    case MigrationPhase::CreateContainer: return MigrationStep::CreateContainer;
    case MigrationPhase::RestoreContainer: return MigrationStep::RestoreContainer;
  }
  return MigrationStep::InitiateRequest;
}

enum class SyncApproach { export_all = 1, registry_layers = 2 };

inline constexpr double kMiB = 1024.0 * 1024.0;

struct CheckpointModel {
  std::uint64_t base_bytes = 2 * 1024 * 1024;
  double bytes_per_memory_byte = 1.0;
  double compression_ratio = 0.35;
  double dump_bandwidth = 200.0 * kMiB;     // bytes/s
  double restore_bandwidth = 200.0 * kMiB;  // bytes/s

  bool valid() const {
    return base_bytes > 0 && bytes_per_memory_byte > 0.0 && compression_ratio > 0.0 &&
           compression_ratio <= 1.0 && dump_bandwidth > 0.0 && restore_bandwidth > 0.0;
  }
};

// Fixed latency plus bytes/bandwidth for every phase that is not checkpoint
// dump/restore. Both file-system approaches pay `snapshot_latency` once.
struct StepTimingModel {
  double initiate_seconds = 0.05;
  double checkpoint_latency = 1.0;
  double restore_latency = 0.7;
  double compress_bandwidth = 512.0 * kMiB;
  double extract_bandwidth = 512.0 * kMiB;
  double snapshot_latency = 4.5;
  double commit_bandwidth = 100.0 * kMiB;
  double export_bandwidth = 100.0 * kMiB;
  double import_bandwidth = 100.0 * kMiB;
  double import_latency = 1.0;
  double registry_latency = 0.5;
  double network_latency = 0.1;
  double create_container_seconds = 0.15;
};

struct CheckpointSize {
  std::uint64_t raw_bytes = 0;
  std::uint64_t compressed_bytes = 0;
};

inline CheckpointSize checkpoint_size(const ContainerSpec& spec, const CheckpointModel& model) {
  CheckpointSize out;
  out.raw_bytes = model.base_bytes + static_cast<std::uint64_t>(std::llround(
                                         model.bytes_per_memory_byte *
                                         static_cast<double>(spec.memory_footprint_bytes)));
  out.compressed_bytes = static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(out.raw_bytes) * model.compression_ratio));
  return out;
}

/// Footprint of a multi-threaded workload: shared part plus a per-thread part.
inline std::uint64_t footprint_for_threads(std::uint64_t shared_bytes, std::uint64_t per_thread_bytes,
                                           std::uint32_t threads) {
  return shared_bytes + per_thread_bytes * threads;
}

/// Measured per-phase seconds for one image (calibration mode).
using CostRow = std::map<MigrationPhase, double>;

struct CostTable {
  std::map<std::string, CostRow> rows;  // image name -> phases

  const CostRow* find(const std::string& image) const {
    auto it = rows.find(image);
    return it == rows.end() ? nullptr : &it->second;
  }
};

// One record per line: `<image> <phase>=<seconds> ...`; '#' starts a comment.
inline CostTable load_cost_table(std::istream& is) {
  CostTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto body = text::trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    auto toks = text::words(body);
    auto bad = [&](const std::string& why) {
      fail(ErrorCategory::ParseError, "cost table line " + std::to_string(lineno) + ": " + why);
    };
    CostRow row;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const auto eq = toks[i].find('=');
      if (eq == std::string_view::npos) bad("expected phase=seconds, got '" + std::string(toks[i]) + "'");
      auto phase = parse_phase(toks[i].substr(0, eq));
      if (!phase) bad("unknown phase '" + std::string(toks[i].substr(0, eq)) + "'");
      auto secs = text::parse_real(toks[i].substr(eq + 1));
      if (!secs || *secs < 0.0) bad("bad seconds for " + std::string(phase_name(*phase)));
      row[*phase] = *secs;
    }
    table.rows[std::string(toks[0])] = std::move(row);
  }
  return table;
}

struct PhaseTiming {
  MigrationPhase phase;
  double seconds = 0.0;
  bool calibrated = false;
};

struct MigrationRecord {
  std::string container_id;
  NodeId source = 0;
  NodeId target = 0;
  SyncApproach approach = SyncApproach::registry_layers;
  std::vector<PhaseTiming> phases;  // execution order
  std::uint64_t bytes_checkpoint_raw = 0;
  std::uint64_t bytes_checkpoint_compressed = 0;
  std::uint64_t bytes_fs_transferred = 0;
  std::uint64_t bytes_pushed = 0;
  std::uint64_t bytes_pulled = 0;
  double downtime = 0.0;    // checkpoint start .. restore end
  double total_time = 0.0;  // request .. restore end
  Tick start_tick = 0;
  Tick resume_tick = 0;
  ImageManifest committed;  // what the target receives

  double step_seconds(MigrationStep step) const {
    double s = 0.0;
    for (const auto& p : phases) {
      if (step_of(p.phase) == step) s += p.seconds;
    }
    return s;
  }
  double phase_seconds(MigrationPhase phase) const {
    for (const auto& p : phases) {
      if (p.phase == phase) return p.seconds;
    }
    return 0.0;
  }
  /// Whole ticks the container is stopped for.
  Tick window_ticks() const {
    return std::max<Tick>(1, static_cast<Tick>(std::ceil(total_time - 1e-9)));
  }
};

struct MigrationSettings {
  SyncApproach approach = SyncApproach::registry_layers;
  double link_bandwidth = 125'000'000.0;  // bytes/s (1 Gbit/s)
  CheckpointModel checkpoint;
  StepTimingModel timing;
  std::optional<CostTable> cost_table;
};

struct MigrationRequest {
  const ContainerSpec& spec;
  const ImageManifest& committed;  // output of commit() on the stopped container
  NodeId source = 0;
  NodeId target = 0;
  const RegistryState& registry;
  const DigestSet& target_layers;
};

/// Per-phase durations and byte counts of one migration. Pure: nothing is
/// pushed or pulled here.
inline MigrationRecord plan_migration(const MigrationRequest& req, const MigrationSettings& cfg) {
  if (req.source == req.target) {
    fail(ErrorCategory::SameNode, "migration of " + req.spec.container_id + " to its own host");
  }
  MigrationRecord rec;
  rec.container_id = req.spec.container_id;
  rec.source = req.source;
  rec.target = req.target;
  rec.approach = cfg.approach;
  rec.committed = req.committed;

  const auto size = checkpoint_size(req.spec, cfg.checkpoint);
  rec.bytes_checkpoint_raw = size.raw_bytes;
  rec.bytes_checkpoint_compressed = size.compressed_bytes;
  const double raw = static_cast<double>(size.raw_bytes);
  const double compressed = static_cast<double>(size.compressed_bytes);
  const auto& t = cfg.timing;
  const double link = cfg.link_bandwidth;

  const ImageManifest& m = req.committed;
  const double init = static_cast<double>(m.init.size_bytes);

  std::vector<std::pair<MigrationPhase, double>> plan;
  plan.emplace_back(MigrationPhase::InitiateRequest, t.initiate_seconds);
  plan.emplace_back(MigrationPhase::CreateCheckpoint, t.checkpoint_latency + raw / cfg.checkpoint.dump_bandwidth);
  plan.emplace_back(MigrationPhase::CompressCheckpoint, raw / t.compress_bandwidth);

  if (cfg.approach == SyncApproach::export_all) {
    const double fs = static_cast<double>(m.total_bytes());
    rec.bytes_fs_transferred = m.total_bytes();
    plan.emplace_back(MigrationPhase::ExportFileSystem, t.snapshot_latency + fs / t.export_bandwidth);
    plan.emplace_back(MigrationPhase::TransferCheckpoint, t.network_latency + compressed / link);
    plan.emplace_back(MigrationPhase::TransferFileSystem, t.network_latency + fs / link);
    plan.emplace_back(MigrationPhase::ExtractCheckpoint, raw / t.extract_bandwidth);
    plan.emplace_back(MigrationPhase::ImportFileSystem, t.import_latency + fs / t.import_bandwidth);
  } else {
    // Base layers dedup against the registry and the target; the freshly
    // committed init layer always travels both ways.
    std::uint64_t pushed = m.init.size_bytes;
    std::uint64_t pulled = m.init.size_bytes;
    for (const auto& l : m.layers) {
      if (!req.registry.contains(l.digest)) pushed += l.size_bytes;
      if (!req.target_layers.count(l.digest)) pulled += l.size_bytes;
    }
    rec.bytes_pushed = pushed;
    rec.bytes_pulled = pulled;
    rec.bytes_fs_transferred = pushed + pulled;
    plan.emplace_back(MigrationPhase::CommitFileSystem, t.snapshot_latency + init / t.commit_bandwidth);
    plan.emplace_back(MigrationPhase::PushImage, t.registry_latency + static_cast<double>(pushed) / link);
    plan.emplace_back(MigrationPhase::TransferCheckpoint, t.network_latency + compressed / link);
    plan.emplace_back(MigrationPhase::ExtractCheckpoint, raw / t.extract_bandwidth);
    plan.emplace_back(MigrationPhase::PullImage, t.registry_latency + static_cast<double>(pulled) / link);
  }
  plan.emplace_back(MigrationPhase::CreateContainer, t.create_container_seconds);
  plan.emplace_back(MigrationPhase::RestoreContainer, t.restore_latency + raw / cfg.checkpoint.restore_bandwidth);

  const CostRow* calibrated = nullptr;
  if (cfg.cost_table) {
    calibrated = cfg.cost_table->find(req.spec.class_name);
    if (!calibrated) calibrated = cfg.cost_table->find(req.spec.image_ref);
  }
  for (const auto& [phase, secs] : plan) {
    PhaseTiming pt{phase, secs, false};
    if (calibrated) {
      if (auto it = calibrated->find(phase); it != calibrated->end()) {
        pt.seconds = it->second;
        pt.calibrated = true;
      }
    }
    rec.total_time += pt.seconds;
    if (phase != MigrationPhase::InitiateRequest) rec.downtime += pt.seconds;
    rec.phases.push_back(pt);
  }
  return rec;
}

/// Applies a planned migration: the container stops now, its layers move
/// through the registry (approach 2) and it resumes on the target once the
/// stop window has elapsed. Completed work and remaining duration carry over.
inline void execute_migration(MigrationRecord& record, World& world) {
  ContainerState* c = world.find(record.container_id);
  if (!c) fail(ErrorCategory::UnknownContainer, "no container " + record.container_id);
  if (!c->running() || c->host != record.source) {
    fail(ErrorCategory::ContainerVanished,
         "container " + record.container_id + " is no longer running on node " +
             std::to_string(record.source));
  }
  if (record.target >= world.nodes.size()) {
    fail(ErrorCategory::UnknownNode, "migration target " + std::to_string(record.target));
  }
  auto& target_layers = world.node_layers[record.target];
  if (record.approach == SyncApproach::registry_layers) {
    push(record.committed, world.registry);
    pull(record.committed.image_ref, world.registry, target_layers);
  } else {
    for (const auto& l : record.committed.layers) target_layers.insert(l.digest);
    target_layers.insert(record.committed.init.digest);
  }
  record.start_tick = world.now;
  record.resume_tick = world.now + record.window_ticks();
  c->status = ContainerStatus::migrating;
  c->migration_target = record.target;
  c->resume_tick = record.resume_tick;
  c->throughput = 0.0;
  ++c->migration_count;
}

/// Stop, commit, plan and execute in one go; what a worker's migration module does.
inline MigrationRecord migrate_container(World& world, const std::string& container_id,
                                         NodeId target, const MigrationSettings& cfg) {
  ContainerState* c = world.find(container_id);
  if (!c) fail(ErrorCategory::UnknownContainer, "no container " + container_id);
  if (!c->running()) {
    fail(ErrorCategory::ContainerVanished, "container " + container_id + " is not running");
  }
  if (target >= world.nodes.size()) {
    fail(ErrorCategory::UnknownNode, "migration target " + std::to_string(target));
  }
  auto image = world.images.find(c->spec.image_ref);
  if (image == world.images.end()) {
    fail(ErrorCategory::UnknownImage, "no image " + c->spec.image_ref);
  }
  const auto committed = commit(image->second, WritableLayer{container_id, c->bytes_written, true});
  MigrationRecord rec = plan_migration(
      MigrationRequest{c->spec, committed, c->host, target, world.registry,
                       world.node_layers.at(target)},
      cfg);
  execute_migration(rec, world);
  return rec;
}

}  // namespace cbalancer
