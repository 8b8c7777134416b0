// c3run: run one scenario or the full density sweep.
//
//   c3run run   --nodes 30 --algo c3run --seed 42 --trace trace.csv
//   c3run sweep --out results.csv --summary-out summary.csv
//
// Exit codes: 0 ok, 1 configuration error, 2 topology generation failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "c3run/harness.hpp"

namespace {

int emit(const c3run::SweepConfig& c, const c3run::ResultTable& table) {
  if (c.out.empty())
    c3run::write_results(table, c.format, std::cout);
  else
    c3run::write_results(table, c.format, c.out);
  if (!c.summary_out.empty()) c3run::write_summary(c3run::summarize(table), c.summary_out);
  for (const auto& r : table)
    if (r.generation_failed) {
      std::cerr << "c3run: topology generation failed for n=" << r.n_nodes << " trial=" << r.trial << "\n";
      return 2;
    }
  return 0;
}

int run_single(const c3run::SweepConfig& c) {
  const std::size_t n = c.densities.front();
  const std::uint64_t seed = c3run::child_seed(c.seed, n, 0);
  c3run::Scenario scenario;
  try {
    scenario = c3run::make_scenario(c.scenario_spec(n), seed);
  } catch (const c3run::GenerationError& e) {
    std::cerr << "c3run: " << e.what() << "\n";
    return 2;
  }
  c3run::ResultTable table;
  std::vector<std::pair<c3run::Algorithm, c3run::RecoveryReport>> runs;
  for (c3run::Algorithm a : c.algorithms) {
    auto report = c3run::simulate(scenario, a, !c.trace.empty());
    table.push_back(c3run::make_row(a, n, 0, seed, report));
    runs.emplace_back(a, std::move(report));
  }
  if (!c.trace.empty()) {
    std::ofstream f(c.trace);
    if (!f) throw std::runtime_error("cannot open '" + c.trace + "' for writing");
    c3run::write_trace(runs, f);
  }
  return emit(c, table);
}

}  // namespace

int main(int argc, char** argv) {
  c3run::CliRequest req;
  try {
    req = c3run::parse_config(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const c3run::HelpRequested& e) {
    std::cout << e.what();
    return 0;
  } catch (const c3run::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  try {
    if (req.command == c3run::Command::Run) return run_single(req.config);
    return emit(req.config, c3run::run_sweep(req.config));
  } catch (const std::exception& e) {
    std::cerr << "c3run: " << e.what() << "\n";
    return 1;
  }
}
