#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cbalancer/contention.hpp"
#include "cbalancer/control_plane.hpp"
#include "cbalancer/error.hpp"
#include "cbalancer/ga.hpp"
#include "cbalancer/migration.hpp"
#include "cbalancer/objective.hpp"
#include "cbalancer/registry.hpp"
#include "cbalancer/simulator.hpp"
#include "cbalancer/text.hpp"

namespace cbalancer {

struct ImageDef {
  std::string name;
  std::vector<std::pair<std::string, std::uint64_t>> layers;  // content id, bytes
  std::uint64_t init_bytes = 1024 * 1024;
};

/// A container class preset (one benchmark program).
struct ContainerClass {
  std::string name;
  std::string image;
  ResourceVector demand;
  std::uint64_t memory_footprint = 0;
  std::uint64_t footprint_per_thread = 0;
  std::uint32_t threads = 1;
  double base_throughput = 1000.0;
  std::uint64_t fs_write_rate = 0;  // bytes per tick
  std::vector<std::string> volumes;
};

struct Launch {
  std::string class_name;
  std::size_t replicas = 1;
  Tick arrival = 0;
  Tick duration = 120;
  std::optional<std::uint32_t> threads;
};

struct Scenario {
  std::string name = "scenario";
  std::size_t node_count = 1;
  ResourceVector capacity = ResourceVector::filled(1.0);
  std::uint64_t seed = 1;
  Strategy strategy = Strategy::spread;
  Tick profiling_interval = 5;
  std::optional<Tick> horizon;

  ObjectiveWeights weights;
  GaConfig ga;
  bool ga_seed_explicit = false;
  Tick invoke_every = 60;
  Tick first_round = 5;

  ContentionParams contention;
  MigrationSettings migration;
  std::optional<std::string> cost_table_path;

  std::vector<std::string> registry_preload;
  std::map<std::string, ImageDef> images;
  std::map<std::string, ContainerClass> classes;
  std::vector<Launch> workload;

  /// GA seed actually used: explicit, or the scenario seed.
  std::uint64_t effective_ga_seed() const { return ga_seed_explicit ? ga.seed : seed; }

  Tick effective_horizon() const {
    if (horizon) return *horizon;
    Tick h = 0;
    for (const auto& l : workload) h = std::max(h, l.arrival + l.duration);
    return h;
  }

  /// Workload expanded into concrete containers, in launch order.
  std::vector<ContainerSpec> containers() const {
    std::vector<ContainerSpec> out;
    std::map<std::string, std::size_t> counter;
    for (const auto& l : workload) {
      const auto& cls = classes.at(l.class_name);
      const std::uint32_t threads = l.threads.value_or(cls.threads);
      for (std::size_t r = 0; r < l.replicas; ++r) {
        ContainerSpec s;
        char id[32];
        std::snprintf(id, sizeof id, "-%03zu", counter[cls.name]++);
        s.container_id = cls.name + id;
        s.class_name = cls.name;
        s.image_ref = cls.image;
        s.demand = cls.demand;
        s.thread_count = threads;
        s.memory_footprint_bytes =
            footprint_for_threads(cls.memory_footprint, cls.footprint_per_thread, threads);
        s.base_throughput = cls.base_throughput;
        s.duration_ticks = l.duration;
        s.arrival_tick = l.arrival;
        s.fs_write_bytes_per_tick = cls.fs_write_rate;
        out.push_back(std::move(s));
      }
    }
    return out;
  }

  ImageManifest manifest(const std::string& image) const {
    const auto& def = images.at(image);
    return make_image(def.name, def.layers, def.init_bytes);
  }

  /// Longest migration any workload container could need: empty registry,
  /// empty target.
  double worst_case_migration_seconds() const {
    double worst = 0.0;
    RegistryState empty;
    DigestSet none;
    MigrationSettings cfg = migration;
    cfg.cost_table.reset();
    for (const auto& spec : containers()) {
      const auto m = manifest(spec.image_ref);
      for (auto approach : {SyncApproach::export_all, SyncApproach::registry_layers}) {
        cfg.approach = approach;
        const auto rec = plan_migration(MigrationRequest{spec, m, 0, 1, empty, none}, cfg);
        worst = std::max(worst, rec.total_time);
      }
    }
    return worst;
  }

  void validate() const;
};

namespace detail {

struct ScenarioParser {
  Scenario& sc;
  std::set<std::filesystem::path> open_files;

  [[noreturn]] static void parse_error(const std::string& where, const std::string& why) {
    fail(ErrorCategory::ParseError, where + ": " + why);
  }

  static ResourceVector parse_vector(std::string_view value, const std::string& where,
                                     ResourceVector out = {}) {
    for (auto tok : text::words(value)) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) parse_error(where, "expected resource:value, got '" + std::string(tok) + "'");
      auto r = parse_resource(tok.substr(0, colon));
      if (!r) parse_error(where, "unknown resource '" + std::string(tok.substr(0, colon)) + "'");
      auto v = text::parse_real(tok.substr(colon + 1));
      if (!v || *v < 0.0) parse_error(where, "bad value for " + std::string(resource_name(*r)));
      out[*r] = *v;
    }
    return out;
  }

  static double real(std::string_view v, const std::string& where) {
    auto x = text::parse_real(v);
    if (!x) parse_error(where, "expected a number, got '" + std::string(text::trim(v)) + "'");
    return *x;
  }
  static std::int64_t integer(std::string_view v, const std::string& where) {
    auto x = text::parse_int(v);
    if (!x) parse_error(where, "expected an integer, got '" + std::string(text::trim(v)) + "'");
    return *x;
  }
  static std::uint64_t count(std::string_view v, const std::string& where) {
    auto x = integer(v, where);
    if (x < 0) parse_error(where, "expected a non-negative integer");
    return static_cast<std::uint64_t>(x);
  }
  static std::uint64_t bytes(std::string_view v, const std::string& where) {
    auto x = text::parse_bytes(v);
    if (!x) parse_error(where, "expected a byte size, got '" + std::string(text::trim(v)) + "'");
    return *x;
  }
  static double rate(std::string_view v, const std::string& where) {
    return static_cast<double>(bytes(v, where));
  }

  // `key=value` options after a leading positional word.
  static std::map<std::string, std::string> options(const std::vector<std::string_view>& toks,
                                                    const std::string& where) {
    std::map<std::string, std::string> out;
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const auto eq = toks[i].find('=');
      if (eq == std::string_view::npos) parse_error(where, "expected key=value, got '" + std::string(toks[i]) + "'");
      out[std::string(toks[i].substr(0, eq))] = std::string(toks[i].substr(eq + 1));
    }
    return out;
  }

  void parse_file(const std::filesystem::path& path) {
    const auto canonical = std::filesystem::weakly_canonical(path);
    if (open_files.count(canonical)) parse_error(path.string(), "include cycle");
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::IoError, "cannot open " + path.string());
    open_files.insert(canonical);
    std::stringstream buf;
    buf << in.rdbuf();
    parse_text(buf.str(), path);
    open_files.erase(canonical);
  }

  void parse_text(const std::string& content, const std::filesystem::path& origin) {
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    std::string section = "";
    std::string section_arg;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string where = origin.string() + ":" + std::to_string(lineno);
      auto body = text::trim(std::string_view(line).substr(0, line.find('#')));
      if (body.empty()) continue;
      if (body.front() == '[') {
        if (body.back() != ']') parse_error(where, "unterminated section header");
        auto header = text::words(body.substr(1, body.size() - 2));
        if (header.empty() || header.size() > 2) parse_error(where, "bad section header");
        section = std::string(header[0]);
        section_arg = header.size() == 2 ? std::string(header[1]) : "";
        const bool needs_arg = section == "image" || section == "class";
        if (needs_arg != !section_arg.empty()) parse_error(where, "section [" + section + "] name mismatch");
        if (section == "image") sc.images[section_arg].name = section_arg;
        if (section == "class") sc.classes[section_arg].name = section_arg;
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) parse_error(where, "expected key = value");
      const std::string key(text::trim(body.substr(0, eq)));
      const std::string_view value = text::trim(body.substr(eq + 1));
      const std::string field = where + " [" + section + "] " + key;
      if (key == "include") {
        parse_file(origin.parent_path() / std::string(value));
        continue;
      }
      assign(section, section_arg, key, value, field);
    }
  }

  void assign(const std::string& section, const std::string& arg, const std::string& key,
              std::string_view value, const std::string& where) {
    auto unknown = [&] { parse_error(where, "unknown field"); };
    if (section == "cluster") {
      if (key == "name") sc.name = std::string(value);
      else if (key == "nodes") sc.node_count = count(value, where);
      else if (key == "capacity") sc.capacity = parse_vector(value, where, sc.capacity);
      else if (key == "seed") sc.seed = count(value, where);
      else if (key == "strategy") {
        auto s = parse_strategy(value);
        if (!s) parse_error(where, "unknown strategy '" + std::string(value) + "'");
        sc.strategy = *s;
      } else if (key == "profiling_interval") sc.profiling_interval = integer(value, where);
      else if (key == "horizon") sc.horizon = integer(value, where);
      else unknown();
    } else if (section == "objective") {
      if (key == "alpha") sc.weights.alpha = real(value, where);
      else if (key == "alpha_convention") {
        if (value == "formula") sc.weights.convention = AlphaConvention::formula;
        else if (value == "prose") sc.weights.convention = AlphaConvention::prose;
        else parse_error(where, "expected formula or prose");
      } else unknown();
    } else if (section == "ga") {
      if (key == "population_size") sc.ga.population_size = count(value, where);
      else if (key == "generations") sc.ga.generations = count(value, where);
      else if (key == "crossover_prob") sc.ga.crossover_prob = real(value, where);
      else if (key == "mutation_prob") sc.ga.mutation_prob = real(value, where);
      else if (key == "elitism_count") sc.ga.elitism_count = count(value, where);
      else if (key == "tournament_size") sc.ga.tournament_size = count(value, where);
      else if (key == "seed") { sc.ga.seed = count(value, where); sc.ga_seed_explicit = true; }
      else unknown();
    } else if (section == "manager") {
      if (key == "invoke_every") sc.invoke_every = integer(value, where);
      else if (key == "first_round") sc.first_round = integer(value, where);
      else unknown();
    } else if (section == "contention") {
      if (key == "gamma") sc.contention.interference_gamma = parse_vector(value, where, sc.contention.interference_gamma);
      else unknown();
    } else if (section == "checkpoint") {
      auto& m = sc.migration.checkpoint;
      if (key == "base_bytes") m.base_bytes = bytes(value, where);
      else if (key == "bytes_per_memory_byte") m.bytes_per_memory_byte = real(value, where);
      else if (key == "compression_ratio") m.compression_ratio = real(value, where);
      else if (key == "dump_bandwidth") m.dump_bandwidth = rate(value, where);
      else if (key == "restore_bandwidth") m.restore_bandwidth = rate(value, where);
      else unknown();
    } else if (section == "migration") {
      auto& t = sc.migration.timing;
      if (key == "approach") {
        const auto a = integer(value, where);
        if (a != 1 && a != 2) parse_error(where, "approach must be 1 or 2");
        sc.migration.approach = static_cast<SyncApproach>(a);
      } else if (key == "link_bandwidth") sc.migration.link_bandwidth = rate(value, where);
      else if (key == "cost_table") sc.cost_table_path = std::string(value);
      else if (key == "initiate_seconds") t.initiate_seconds = real(value, where);
      else if (key == "checkpoint_latency") t.checkpoint_latency = real(value, where);
      else if (key == "restore_latency") t.restore_latency = real(value, where);
      else if (key == "snapshot_latency") t.snapshot_latency = real(value, where);
      else if (key == "import_latency") t.import_latency = real(value, where);
      else if (key == "registry_latency") t.registry_latency = real(value, where);
      else if (key == "network_latency") t.network_latency = real(value, where);
      else if (key == "create_container_seconds") t.create_container_seconds = real(value, where);
      else if (key == "compress_bandwidth") t.compress_bandwidth = rate(value, where);
      else if (key == "extract_bandwidth") t.extract_bandwidth = rate(value, where);
      else if (key == "commit_bandwidth") t.commit_bandwidth = rate(value, where);
      else if (key == "export_bandwidth") t.export_bandwidth = rate(value, where);
      else if (key == "import_bandwidth") t.import_bandwidth = rate(value, where);
      else unknown();
    } else if (section == "registry") {
      if (key == "preload") {
        for (auto w : text::words(value)) sc.registry_preload.emplace_back(w);
      } else unknown();
    } else if (section == "image") {
      auto& img = sc.images[arg];
      if (key == "layer") {
        auto toks = text::words(value);
        if (toks.size() != 2) parse_error(where, "expected `layer = <content-id> <size>`");
        img.layers.emplace_back(std::string(toks[0]), bytes(toks[1], where));
      } else if (key == "init") img.init_bytes = bytes(value, where);
      else unknown();
    } else if (section == "class") {
      auto& c = sc.classes[arg];
      if (key == "image") c.image = std::string(value);
      else if (key == "demand") c.demand = parse_vector(value, where);
      else if (key == "memory_footprint") c.memory_footprint = bytes(value, where);
      else if (key == "footprint_per_thread") c.footprint_per_thread = bytes(value, where);
      else if (key == "threads") c.threads = static_cast<std::uint32_t>(count(value, where));
      else if (key == "base_throughput") c.base_throughput = real(value, where);
      else if (key == "fs_write_rate") c.fs_write_rate = bytes(value, where);
      else if (key == "volume") c.volumes.emplace_back(value);
      else unknown();
    } else if (section == "workload") {
      if (key != "launch") unknown();
      auto toks = text::words(value);
      if (toks.empty()) parse_error(where, "launch needs a class name");
      Launch l;
      l.class_name = std::string(toks[0]);
      for (const auto& [k, v] : options(toks, where)) {
        if (k == "replicas") l.replicas = count(v, where);
        else if (k == "arrival") l.arrival = integer(v, where);
        else if (k == "duration") l.duration = integer(v, where);
        else if (k == "threads") l.threads = static_cast<std::uint32_t>(count(v, where));
        else parse_error(where, "unknown launch option '" + k + "'");
      }
      sc.workload.push_back(std::move(l));
    } else {
      parse_error(where, section.empty() ? "field outside any section" : "unknown section [" + section + "]");
    }
  }
};

}  // namespace detail

inline void Scenario::validate() const {
  auto bad = [](const std::string& why) { fail(ErrorCategory::ValidationError, why); };
  if (node_count < 1) bad("cluster needs at least one node");
  if (!capacity.non_negative()) bad("capacity must be non-negative");
  if (profiling_interval < 1) bad("profiling_interval must be >= 1");
  if (!weights.valid()) bad("alpha must lie in [0,1]");
  if (!contention.valid()) bad("interference gamma must be >= 0");
  if (!migration.checkpoint.valid()) bad("checkpoint model values must be positive (compression_ratio in (0,1])");
  if (migration.link_bandwidth <= 0.0) bad("link_bandwidth must be positive");
  try {
    ga.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  for (const auto& [name, img] : images) {
    if (img.layers.empty()) bad("image " + name + " has no layers");
    if (img.init_bytes == 0) bad("image " + name + " needs a non-zero init layer");
  }
  for (const auto& [name, cls] : classes) {
    if (!cls.volumes.empty()) {
      bad("class " + name + " declares a volume; volumes are not synchronized by migration");
    }
    if (cls.image.empty()) bad("class " + name + " has no image");
    if (!images.count(cls.image)) bad("class " + name + " references undefined image " + cls.image);
    if (cls.base_throughput <= 0.0) bad("class " + name + " needs base_throughput > 0");
  }
  for (const auto& ref : registry_preload) {
    if (!images.count(ref)) bad("registry preload references undefined image " + ref);
  }
  for (const auto& l : workload) {
    if (!classes.count(l.class_name)) bad("launch references undefined class " + l.class_name);
    if (l.replicas < 1) bad("launch of " + l.class_name + " needs replicas >= 1");
    if (l.duration < 1) bad("launch of " + l.class_name + " needs duration >= 1");
    if (l.arrival < 0) bad("launch of " + l.class_name + " has a negative arrival");
  }
  if (horizon && *horizon < 1) bad("horizon must be >= 1");
}

/// Parses scenario text; `origin` anchors relative include/cost_table paths.
inline Scenario parse_scenario(const std::string& content,
                               const std::filesystem::path& origin = "scenario") {
  Scenario sc;
  detail::ScenarioParser parser{sc, {}};
  parser.parse_text(content, origin);
  if (sc.cost_table_path) {
    const auto path = origin.parent_path() / *sc.cost_table_path;
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::IoError, "cannot open cost table " + path.string());
    sc.migration.cost_table = load_cost_table(in);
  }
  if (!sc.ga_seed_explicit) sc.ga.seed = sc.seed;
  sc.ga.weights = sc.weights;
  sc.validate();
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::IoError, "cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

}  // namespace cbalancer
