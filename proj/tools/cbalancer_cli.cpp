#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cbalancer/cbalancer.hpp"

namespace {

using namespace cbalancer;

struct CommonFlags {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::string strategy;
  std::string convention;
  std::string report_out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--scenario", f.scenario, "Scenario file")->required();
  cmd->add_option("--seed", f.seed, "Override the scenario seed");
  cmd->add_option("--alpha", f.alpha, "Override the fitness weight alpha");
  cmd->add_option("--strategy", f.strategy, "spread | binpack | random | cbalancer");
  cmd->add_option("--alpha-convention", f.convention, "formula | prose");
  cmd->add_option("--report-out", f.report_out, "Write the report here instead of stdout");
}

Scenario load(const CommonFlags& f) {
  Scenario sc = load_scenario(f.scenario);
  if (f.seed) sc.seed = *f.seed;
  if (f.alpha) sc.weights.alpha = *f.alpha;
  if (!f.strategy.empty()) {
    auto s = parse_strategy(f.strategy);
    if (!s) fail(ErrorCategory::ValidationError, "unknown strategy '" + f.strategy + "'");
    sc.strategy = *s;
  }
  if (f.convention == "formula") sc.weights.convention = AlphaConvention::formula;
  else if (f.convention == "prose") sc.weights.convention = AlphaConvention::prose;
  else if (!f.convention.empty()) fail(ErrorCategory::ValidationError, "unknown alpha convention '" + f.convention + "'");
  sc.ga.weights = sc.weights;
  sc.validate();
  return sc;
}

void emit(const std::string& out_path, const std::string& body) {
  if (out_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) fail(ErrorCategory::IoError, "cannot write " + out_path);
  out << body;
}

std::vector<double> parse_alphas(const std::string& csv) {
  std::vector<double> out;
  for (auto tok : text::split(csv, ',')) {
    auto v = text::parse_real(tok);
    if (!v) fail(ErrorCategory::ValidationError, "bad alpha '" + std::string(tok) + "'");
    out.push_back(*v);
  }
  return out;
}

std::vector<Strategy> parse_strategies(const std::string& csv) {
  std::vector<Strategy> out;
  for (auto tok : text::split(csv, ',')) {
    auto s = parse_strategy(text::trim(tok));
    if (!s) fail(ErrorCategory::ValidationError, "unknown strategy '" + std::string(tok) + "'");
    out.push_back(*s);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cbalancer: container-cluster rebalancing simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, compare_flags, validate_flags;
  std::string bus_log, registry_out;
  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write a run report");
  add_common(run_cmd, run_flags);
  run_cmd->add_option("--bus-log", bus_log, "Record bus traffic (tick topic sender payload)");
  run_cmd->add_option("--registry-out", registry_out, "Dump the final registry state");

  std::string alphas_csv = "0,0.25,0.5,0.75,0.85,1";
  auto* sweep_cmd = app.add_subcommand("sweep-alpha", "Run cbalancer once per alpha");
  add_common(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--alphas", alphas_csv, "Comma-separated alphas in [0,1]");

  std::string strategies_csv = "spread,cbalancer";
  auto* compare_cmd = app.add_subcommand("compare", "Compare strategies on one scenario");
  add_common(compare_cmd, compare_flags);
  compare_cmd->add_option("--strategies", strategies_csv, "Comma-separated strategies; first is the baseline");

  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a scenario");
  add_common(validate_cmd, validate_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) {
      const auto sc = load(run_flags);
      Bus bus;
      RegistryState registry;
      const auto report = run(sc, RunOptions{&bus, &registry});
      emit(run_flags.report_out, report_text(report));
      if (!bus_log.empty()) {
        std::ostringstream os;
        bus.write_log(os);
        emit(bus_log, os.str());
      }
      if (!registry_out.empty()) {
        std::ostringstream os;
        dump_registry(registry, os);
        emit(registry_out, os.str());
      }
    } else if (*sweep_cmd) {
      const auto sc = load(sweep_flags);
      std::ostringstream os;
      write_sweep(sc, alpha_sweep(sc, parse_alphas(alphas_csv)), os);
      emit(sweep_flags.report_out, os.str());
    } else if (*compare_cmd) {
      const auto sc = load(compare_flags);
      std::ostringstream os;
      write_compare(sc, compare(sc, parse_strategies(strategies_csv)), os);
      emit(compare_flags.report_out, os.str());
    } else if (*validate_cmd) {
      const auto sc = load(validate_flags);
      std::ostringstream os;
      write_validation(sc, os);
      emit(validate_flags.report_out, os.str());
    }
  } catch (const Error& e) {
    std::cerr << "error[" << category_name(e.category()) << "]: " << e.what() << '\n';
    const auto c = e.category();
    return c == ErrorCategory::ParseError || c == ErrorCategory::ValidationError ||
                   c == ErrorCategory::InvalidConfig
               ? 2
               : (c == ErrorCategory::IoError ? 3 : 1);
  }
  return 0;
}
