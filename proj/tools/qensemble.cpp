// qensemble: scenario runner and self-test driver.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qensemble/acceptance.hpp"
#include "qensemble/error.hpp"
#include "qensemble/parallel.hpp"
#include "qensemble/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

std::uint64_t parse_seed(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text.front() == '-') {
    throw qens::ValidationError("seed must be a non-negative integer, got '" + text + "'");
  }
  return v;
}

struct ScenarioArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::string format = "csv";
  std::string seed;
};

int run_scenario(qens::Scenario scenario, const ScenarioArgs& args) {
  qens::ScenarioConfig cfg;
  cfg.scenario = scenario;
  if (!args.config.empty()) cfg.params = qens::read_config_file(args.config);
  for (const std::string& s : args.sets) {
    auto [key, value] = qens::parse_assignment(s);
    cfg.params[key] = value;
  }
  cfg.format = qens::parse_output_format(args.format);
  cfg.output_path = args.out.empty() ? std::string(qens::to_string(scenario)) + "." +
                                           std::string(qens::to_string(cfg.format))
                                     : args.out;
  if (!args.seed.empty()) cfg.params["seed"] = args.seed;
  cfg.seed = parse_seed(cfg.value("seed"));

  const auto start = std::chrono::steady_clock::now();
  qens::RunResult result = qens::run(cfg);
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  qens::write_output(result, cfg);
  std::cout << qens::report_to_json(result.report);
  if (!result.report.oracles_passed()) {
    std::cerr << "oracle mismatch:\n" << result.report.oracle_diff;
    return kExitNumerical;
  }
  return kExitOk;
}

int run_selftest(bool inject_dispersion) {
  qens::AcceptanceOptions opts;
  opts.corrupt_dispersion = inject_dispersion;
  bool ok = true;
  for (const auto& group : {qens::run_invariants(opts), qens::run_acceptance(opts)}) {
    for (const qens::CriterionResult& r : group) {
      std::cout << qens::format_result(r) << "\n";
      ok = ok && r.passed;
    }
  }
  std::cout << (ok ? "selftest: all checks passed" : "selftest: FAILURES present") << std::endl;
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-ensemble scenario runner"};
  app.require_subcommand(0, 1);

  ScenarioArgs args;
  std::vector<std::pair<qens::Scenario, CLI::App*>> scenarios;
  for (qens::Scenario s : {qens::Scenario::ensemble, qens::Scenario::well, qens::Scenario::spread,
                           qens::Scenario::collapse, qens::Scenario::eraser, qens::Scenario::bomb}) {
    CLI::App* sub = app.add_subcommand(std::string(qens::to_string(s)), "run the " +
                                                                            std::string(qens::to_string(s)) +
                                                                            " scenario");
    sub->add_option("--config", args.config, "flat key=value config file");
    sub->add_option("--set", args.sets, "override a key (K=V), repeatable");
    sub->add_option("--out", args.out, "output path (default <scenario>.<format>)");
    sub->add_option("--format", args.format, "csv | json");
    sub->add_option("--seed", args.seed, "Monte-Carlo seed");
    std::string keys;
    for (const qens::KeySpec& k : qens::scenario_keys(s)) {
      keys += "  " + k.name + " = " + k.default_value + "    " + k.help + "\n";
    }
    sub->footer("Keys:\n" + keys);
    scenarios.emplace_back(s, sub);
  }
  std::string fault;
  CLI::App* selftest = app.add_subcommand("selftest", "run invariant and acceptance checks");
  selftest->add_option("--inject-fault", fault, "test hook: 'dispersion' corrupts the dispersion law");

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitValidation;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    qens::set_thread_cap(qens::thread_cap_from_env());
    if (selftest->parsed()) {
      if (!fault.empty() && fault != "dispersion") {
        throw qens::ValidationError("unknown fault '" + fault + "' (dispersion)");
      }
      return run_selftest(fault == "dispersion");
    }
    for (const auto& [scenario, sub] : scenarios) {
      if (sub->parsed()) return run_scenario(scenario, args);
    }
    std::cerr << app.help();
    return kExitValidation;
  } catch (const qens::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const qens::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
