#pragma once

// Experiment harness: configuration, density sweeps, result tables and
// their CSV / JSON / summary encodings.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "CLI11.hpp"

#include "c3run/channel.hpp"
#include "c3run/rng.hpp"
#include "c3run/simulator.hpp"

namespace c3run {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Carries the usage text when `--help` is given.
class HelpRequested : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

enum class OutputFormat { Csv, Json };

struct SweepConfig {
  std::vector<std::size_t> densities{20, 25, 30, 35, 40, 45, 50};
  std::size_t trials = 15;
  std::vector<Algorithm> algorithms{Algorithm::C3run, Algorithm::Rim, Algorithm::Ledir, Algorithm::CoopBridges};
  double area = 300.0;
  double range = 50.0;
  double speed = 1.0;
  double tick = 1.0;
  std::uint64_t max_ticks = 10'000;
  std::uint64_t detection_delay = 0;
  double alpha = 2.0;
  double power = 1.0;
  double noise = 1.0;
  std::uint64_t seed = 1;
  std::string out;  // empty: stdout
  OutputFormat format = OutputFormat::Csv;
  std::string summary_out;
  std::string trace;
  std::size_t jobs = 1;

  LinkParams link_params() const { return params_for_range(range, power, noise, alpha); }

  ScenarioSpec scenario_spec(std::size_t n_nodes) const {
    ScenarioSpec s;
    s.n_nodes = n_nodes;
    s.area = area;
    s.params = link_params();
    s.speed = speed;
    s.tick = tick;
    s.max_ticks = max_ticks;
    s.detection_delay = detection_delay;
    return s;
  }

  void validate() const {
    auto fail = [](const std::string& flag, const std::string& why) { throw ConfigError(flag + ": " + why); };
    if (densities.empty()) fail("--densities", "at least one density is required");
    for (std::size_t d : densities)
      if (d < 2) fail("--densities", "each density must be at least 2 nodes");
    if (trials < 1) fail("--trials", "must be at least 1");
    if (algorithms.empty()) fail("--algo", "at least one algorithm is required");
    if (!(area > 0.0)) fail("--area", "must be positive");
    if (!(range > 0.0)) fail("--range", "must be positive");
    if (!(speed > 0.0)) fail("--speed", "must be positive");
    if (!(tick > 0.0)) fail("--tick", "must be positive");
    if (max_ticks < 1) fail("--max-ticks", "must be at least 1");
    if (!(alpha > 0.0)) fail("--alpha", "must be positive");
    if (!(power > 0.0)) fail("--power", "must be positive");
    if (!(noise > 0.0)) fail("--noise", "must be positive");
    if (jobs < 1) fail("--jobs", "must be at least 1");
  }
};

enum class Command { Run, Sweep };

struct CliRequest {
  Command command = Command::Sweep;
  SweepConfig config;
};

/// Parses `run` / `sweep` command lines (no subcommand means `sweep`). Flags override values read from
/// `--config <file>` (TOML/INI), which override defaults. Throws
/// ConfigError with a diagnostic naming the offending flag.
inline CliRequest parse_config(const std::vector<std::string>& args) {
  CliRequest req;
  SweepConfig& c = req.config;
  std::size_t nodes = 0;
  std::vector<std::size_t> densities;
  std::vector<std::string> algos;
  std::string format = "csv";

  CLI::App app{"C3RUN connectivity-recovery simulator", "c3run"};
  app.require_subcommand(1);
  auto add_options = [&](CLI::App* sub) {
    sub->add_option("--config", "Read option values from a TOML/INI file (flags override it)");
    auto* n_opt = sub->add_option("--nodes", nodes, "Single node count");
    auto* d_opt = sub->add_option("--densities", densities, "Node counts to sweep")->delimiter(',');
    n_opt->excludes(d_opt);
    sub->add_option("--trials", c.trials, "Trials per density");
    sub->add_option("--algo", algos, "Algorithm: c3run, rim, ledir, ccbridges (repeatable)");
    sub->add_option("--area", c.area, "Side of the square area (m)");
    sub->add_option("--range", c.range, "Direct-link range (m)");
    sub->add_option("--speed", c.speed, "Node speed (m/s)");
    sub->add_option("--tick", c.tick, "Tick length (s)");
    sub->add_option("--max-ticks", c.max_ticks, "Tick cap per run");
    sub->add_option("--alpha", c.alpha, "Path-loss exponent");
    sub->add_option("--power", c.power, "Transmit power");
    sub->add_option("--noise", c.noise, "Noise power");
    sub->add_option("--seed", c.seed, "Master seed");
    sub->add_option("--out", c.out, "Results file (default stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--trace", c.trace, "Per-tick trace CSV (run only)");
    sub->add_option("--summary-out", c.summary_out, "Per-density summary CSV");
    sub->add_option("--detection-delay", c.detection_delay, "Ticks charged for failure detection");
    sub->add_option("--jobs", c.jobs, "Worker threads");
  };
  auto* run = app.add_subcommand("run", "Run one scenario");
  auto* sweep = app.add_subcommand("sweep", "Run the density sweep");
  add_options(run);
  add_options(sweep);

  // Without a subcommand the command line is a sweep.
  std::vector<std::string> argv(args);
  if (argv.empty() || (argv.front() != "run" && argv.front() != "sweep" && argv.front() != "--help" &&
                       argv.front() != "-h"))
    argv.insert(argv.begin(), "sweep");

  // The config file is expanded into flags placed before the command-line
  // ones; keys also given on the command line are dropped.
  std::vector<std::string> user(argv.begin() + 1, argv.end());
  std::string config_path;
  std::vector<std::string> flags;
  for (std::size_t i = 0; i < user.size(); ++i) {
    const std::string& a = user[i];
    if (a == "--config") {
      if (i + 1 == user.size()) throw ConfigError("--config: missing file name");
      config_path = user[++i];
      continue;
    }
    if (a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
      continue;
    }
    if (a.rfind("--", 0) == 0) flags.push_back(a.substr(0, a.find('=')));
  }
  std::vector<std::string> expanded{argv.front()};
  if (!config_path.empty()) {
    auto given = [&](const std::string& flag) {
      if (std::find(flags.begin(), flags.end(), flag) != flags.end()) return true;
      // --nodes and --densities are one setting
      if (flag == "--nodes" || flag == "--densities")
        return std::find(flags.begin(), flags.end(), "--nodes") != flags.end() ||
               std::find(flags.begin(), flags.end(), "--densities") != flags.end();
      return false;
    };
    std::vector<CLI::ConfigItem> items;
    try {
      items = CLI::ConfigTOML().from_file(config_path);
    } catch (const CLI::Error& e) {
      throw ConfigError("--config: " + std::string(e.what()));
    }
    for (const CLI::ConfigItem& item : items) {
      if (item.name == "++" || item.name == "--") continue;  // section markers
      if (!item.parents.empty()) {
        const std::string& section = item.parents.front();
        if (item.parents.size() > 1 || (section != "run" && section != "sweep"))
          throw ConfigError("--config: unknown section '" + item.fullname() + "'");
        if (section != argv.front()) continue;
      }
      const std::string flag = "--" + item.name;
      if (given(flag)) continue;
      if (item.inputs.empty()) throw ConfigError("--config: key '" + item.name + "' has no value");
      for (const std::string& v : item.inputs) {
        expanded.push_back(flag);
        expanded.push_back(v);
        if (flag != "--algo" && flag != "--densities") break;
      }
    }
  }
  for (std::size_t i = 0; i < user.size(); ++i) {
    if (user[i] == "--config") {
      ++i;
      continue;
    }
    if (user[i].rfind("--config=", 0) == 0) continue;
    expanded.push_back(user[i]);
  }

  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(run->parsed() ? run->help() : sweep->parsed() ? sweep->help() : app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string(e.what()) + "\n" + app.help());
  }

  req.command = run->parsed() ? Command::Run : Command::Sweep;
  if (nodes != 0) c.densities = {nodes};
  if (!densities.empty()) c.densities = densities;
  if (!algos.empty()) {
    c.algorithms.clear();
    for (const auto& a : algos) {
      try {
        c.algorithms.push_back(parse_algorithm(a));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--algo: ") + e.what());
      }
    }
  }
  c.format = format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  if (req.command == Command::Run && c.densities.size() > 1 && densities.empty() && nodes == 0)
    c.densities = {c.densities.front()};
  if (req.command == Command::Sweep && !c.trace.empty()) throw ConfigError("--trace: only valid with `run`");
  c.validate();
  return req;
}

struct ResultRow {
  std::string algo;
  std::size_t n_nodes = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  int success = 0;
  std::size_t nodes_moved = 0;
  double total_distance_m = 0.0;
  std::uint64_t recovery_ticks = 0;

  // Not serialized.
  bool generation_failed = false;
  std::size_t invariant_violations = 0;
};

using ResultTable = std::vector<ResultRow>;

inline ResultRow make_row(Algorithm algo, std::size_t n, std::size_t trial, std::uint64_t seed,
                          const RecoveryReport& r) {
  ResultRow row;
  row.algo = std::string(to_string(algo));
  row.n_nodes = n;
  row.trial = trial;
  row.seed = seed;
  row.success = r.success ? 1 : 0;
  row.nodes_moved = r.nodes_moved;
  row.total_distance_m = r.total_distance;
  row.recovery_ticks = r.recovery_ticks;
  row.invariant_violations = r.invariant_violations;
  return row;
}

/// Rows for one (density, trial) cell: one scenario, every algorithm on it.
inline std::vector<ResultRow> run_cell(const SweepConfig& config, std::size_t n, std::size_t trial) {
  const std::uint64_t seed = child_seed(config.seed, n, trial);
  std::vector<ResultRow> rows;
  try {
    const Scenario scenario = make_scenario(config.scenario_spec(n), seed);
    for (Algorithm a : config.algorithms) rows.push_back(make_row(a, n, trial, seed, simulate(scenario, a)));
  } catch (const GenerationError&) {
    for (Algorithm a : config.algorithms) {
      ResultRow row;
      row.algo = std::string(to_string(a));
      row.n_nodes = n;
      row.trial = trial;
      row.seed = seed;
      row.generation_failed = true;
      rows.push_back(row);
    }
  }
  return rows;
}

/// Runs every (density, trial) cell, on `config.jobs` threads. Rows are
/// ordered by (requested algorithm order, n_nodes, trial).
inline ResultTable run_sweep(const SweepConfig& config) {
  config.validate();
  struct Cell {
    std::size_t n, trial;
  };
  std::vector<Cell> cells;
  for (std::size_t n : config.densities)
    for (std::size_t t = 0; t < config.trials; ++t) cells.push_back({n, t});

  std::vector<std::vector<ResultRow>> out(cells.size());
  auto work = [&](std::size_t worker) {
    for (std::size_t i = worker; i < cells.size(); i += config.jobs) out[i] = run_cell(config, cells[i].n, cells[i].trial);
  };
  if (config.jobs <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < config.jobs; ++w) pool.emplace_back(work, w);
  }

  ResultTable table;
  for (auto& rows : out)
    for (auto& r : rows) table.push_back(std::move(r));
  auto rank = [&](const std::string& name) {
    for (std::size_t i = 0; i < config.algorithms.size(); ++i)
      if (to_string(config.algorithms[i]) == name) return i;
    return config.algorithms.size();
  };
  std::stable_sort(table.begin(), table.end(), [&](const ResultRow& a, const ResultRow& b) {
    return std::make_tuple(rank(a.algo), a.n_nodes, a.trial) < std::make_tuple(rank(b.algo), b.n_nodes, b.trial);
  });
  return table;
}

inline constexpr const char* kResultsHeader =
    "algo,n_nodes,trial,seed,success,nodes_moved,total_distance_m,recovery_ticks";
inline constexpr const char* kSummaryHeader =
    "algo,n_nodes,mean_nodes_moved,mean_distance_m,mean_ticks,success_ratio";

inline void write_results(const ResultTable& table, OutputFormat format, std::ostream& os) {
  if (format == OutputFormat::Csv) {
    os << kResultsHeader << '\n';
    for (const ResultRow& r : table)
      os << fmt::format("{},{},{},{},{},{},{:.6f},{}\n", r.algo, r.n_nodes, r.trial, r.seed, r.success,
                        r.nodes_moved, r.total_distance_m, r.recovery_ticks);
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ResultRow& r : table)
    arr.push_back({{"algo", r.algo},
                   {"n_nodes", r.n_nodes},
                   {"trial", r.trial},
                   {"seed", r.seed},
                   {"success", r.success},
                   {"nodes_moved", r.nodes_moved},
                   {"total_distance_m", r.total_distance_m},
                   {"recovery_ticks", r.recovery_ticks}});
  os << arr.dump(2) << '\n';
}

namespace detail {
template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  writer(f);
  f.flush();
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}
}  // namespace detail

inline void write_results(const ResultTable& table, OutputFormat format, const std::string& path) {
  detail::write_file(path, [&](std::ostream& os) { write_results(table, format, os); });
}

struct SummaryRow {
  std::string algo;
  std::size_t n_nodes = 0;
  double mean_nodes_moved = 0.0;
  double mean_distance_m = 0.0;
  double mean_ticks = 0.0;
  double success_ratio = 0.0;
  std::size_t trials = 0;
};

/// Per-(algo, density) means in first-appearance order of the table.
inline std::vector<SummaryRow> summarize(const ResultTable& table) {
  std::vector<SummaryRow> out;
  std::map<std::pair<std::string, std::size_t>, std::size_t> index;
  for (const ResultRow& r : table) {
    auto [it, fresh] = index.try_emplace({r.algo, r.n_nodes}, out.size());
    if (fresh) out.push_back({r.algo, r.n_nodes});
    SummaryRow& s = out[it->second];
    s.mean_nodes_moved += static_cast<double>(r.nodes_moved);
    s.mean_distance_m += r.total_distance_m;
    s.mean_ticks += static_cast<double>(r.recovery_ticks);
    s.success_ratio += r.success;
    ++s.trials;
  }
  for (SummaryRow& s : out) {
    const double k = static_cast<double>(s.trials);
    s.mean_nodes_moved /= k;
    s.mean_distance_m /= k;
    s.mean_ticks /= k;
    s.success_ratio /= k;
  }
  return out;
}

inline void write_summary(const std::vector<SummaryRow>& rows, std::ostream& os) {
  os << kSummaryHeader << '\n';
  for (const SummaryRow& s : rows)
    os << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", s.algo, s.n_nodes, s.mean_nodes_moved,
                      s.mean_distance_m, s.mean_ticks, s.success_ratio);
}

inline void write_summary(const std::vector<SummaryRow>& rows, const std::string& path) {
  detail::write_file(path, [&](std::ostream& os) { write_summary(rows, os); });
}

/// Per-tick trace rows: `algo,tick,phase,node,x,y`.
inline void write_trace(const std::vector<std::pair<Algorithm, RecoveryReport>>& runs, std::ostream& os) {
  os << "algo,tick,phase,node,x,y\n";
  for (const auto& [algo, report] : runs)
    for (const TraceRecord& t : report.trace)
      for (const NodeMove& m : t.moves)
        os << fmt::format("{},{},{},{},{:.6f},{:.6f}\n", to_string(algo), t.tick, t.phase, m.id, m.to.x, m.to.y);
}

}  // namespace c3run
