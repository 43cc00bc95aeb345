// copulasurv command-line interface: fit, simulate, replicate.
//
// Exit codes: 0 success (converged fit), 1 input error, 2 convergence
// failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "copulasurv/csv_io.hpp"
#include "copulasurv/errors.hpp"
#include "copulasurv/report.hpp"
#include "copulasurv/scenarios.hpp"
#include "copulasurv/simulation.hpp"

namespace {

using copulasurv::CopulaFamily;
using copulasurv::FitReport;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoConvergence = 2;

CopulaFamily parse_family(const std::string& name) {
  if (name == "clayton") return CopulaFamily::Clayton;
  if (name == "gumbel") return CopulaFamily::GumbelHougaard;
  if (name == "invgauss") return CopulaFamily::InverseGaussian;
  throw copulasurv::InputError("unknown copula '" + name +
                               "' (expected clayton|gumbel|invgauss)");
}

int default_threads() {
  if (const char* env = std::getenv("COPULASURV_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

void emit(const json& j, const std::string& json_out) {
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    if (!out) throw copulasurv::InputError("cannot write '" + json_out + "'");
    out << text;
  }
}

struct FitArgs {
  std::string data_path;
  std::string copula;
  std::string method;
  int jackknife_groups = 0; // 0 = leave-one-cluster-out
  std::uint64_t seed = 0;
  int threads = default_threads();
  std::string json_out;
};

int run_fit(const FitArgs& args) {
  const CopulaFamily family = parse_family(args.copula);
  const copulasurv::Dataset data = copulasurv::read_dataset_csv(args.data_path);

  FitReport report;
  if (args.method == "one-stage") {
    report = copulasurv::fit_one_stage(family, data);
  } else if (args.method == "two-stage") {
    report = copulasurv::fit_two_stage_parametric(family, data);
  } else if (args.method == "semiparam") {
    std::optional<int> g;
    if (args.jackknife_groups > 0) g = args.jackknife_groups;
    report = copulasurv::fit_two_stage_semiparametric(family, data, g,
                                                      args.threads);
  } else {
    throw copulasurv::InputError("unknown method '" + args.method +
                                 "' (expected one-stage|two-stage|semiparam)");
  }

  json config;
  config["data"] = args.data_path;
  config["copula"] = args.copula;
  config["method"] = args.method;
  config["jackknife_groups"] =
      args.jackknife_groups > 0 ? json(args.jackknife_groups) : json(nullptr);
  config["seed"] = args.seed;
  config["threads"] = args.threads;
  emit(copulasurv::fit_report_json(report, family, data, config),
       args.json_out);
  return report.converged ? kExitOk : kExitNoConvergence;
}

struct SimulateArgs {
  std::string copula = "clayton";
  double theta = 0.5;
  int clusters = 200;
  int size_min = 2;
  int size_max = 50;
  double lambda = 0.0316;
  double rho = 1.5;
  double beta = 3.0;
  double censor_lambda = 0.0;
  double censor_rho = 1.5;
  std::uint64_t seed = 0;
  std::string out_dir;
  int replicates = 1;
};

copulasurv::SimulationConfig to_config(const SimulateArgs& a) {
  copulasurv::SimulationConfig cfg;
  cfg.family = {parse_family(a.copula), a.theta};
  cfg.n_clusters = a.clusters;
  cfg.size_min = a.size_min;
  cfg.size_max = a.size_max;
  cfg.margin = {a.lambda, a.rho, {a.beta}};
  if (a.censor_lambda > 0.0)
    cfg.censoring = copulasurv::CensoringConfig{a.censor_lambda, a.censor_rho};
  cfg.seed = a.seed;
  cfg.replicates = a.replicates;
  return cfg;
}

int run_simulate(const SimulateArgs& args) {
  const auto cfg = to_config(args);
  cfg.validate();
  std::filesystem::create_directories(args.out_dir);

  json manifest;
  manifest["schema_version"] = copulasurv::kReportSchemaVersion;
  manifest["config"] = {
      {"copula", args.copula},       {"theta", args.theta},
      {"clusters", args.clusters},   {"size_min", args.size_min},
      {"size_max", args.size_max},   {"lambda", args.lambda},
      {"rho", args.rho},             {"beta", args.beta},
      {"censor_lambda", args.censor_lambda}, {"censor_rho", args.censor_rho},
      {"seed", args.seed},           {"replicates", args.replicates},
  };
  json files = json::array();
  for (int r = 0; r < args.replicates; ++r) {
    const copulasurv::Dataset data = copulasurv::generate_dataset(cfg, r);
    char name[32];
    std::snprintf(name, sizeof(name), "sim_%04d.csv", r);
    const auto path = std::filesystem::path(args.out_dir) / name;
    copulasurv::write_dataset_csv(data, path.string());
    const int n = data.n_subjects();
    json f;
    f["file"] = name;
    f["replicate"] = r;
    f["n_clusters"] = data.n_clusters();
    f["n_subjects"] = n;
    f["censoring_rate"] = n > 0 ? 1.0 - double(data.n_events()) / n : 0.0;
    files.push_back(f);
  }
  manifest["files"] = files;
  std::ofstream mf(std::filesystem::path(args.out_dir) / "manifest.json");
  if (!mf)
    throw copulasurv::InputError("cannot write manifest in '" + args.out_dir +
                                 "'");
  mf << manifest.dump(2) << "\n";
  return kExitOk;
}

struct ReplicateArgs {
  std::string scenario;
  std::string grid_file;
  int replicates = 100;
  int threads = default_threads();
  std::uint64_t seed = 0;
  int jackknife_groups = 50;
  std::string json_out;
};

json run_one_cell(const copulasurv::Scenario& scenario,
                  const ReplicateArgs& args) {
  copulasurv::SimulationConfig cfg = scenario.config;
  cfg.seed = args.seed;
  cfg.replicates = args.replicates;
  copulasurv::ReplicationOptions opts;
  opts.parallelism = args.threads;
  opts.jackknife_groups = args.jackknife_groups;
  const auto summary = copulasurv::run_replication(cfg, opts);
  return copulasurv::replication_json(scenario.name, cfg, opts, summary);
}

int run_replicate(const ReplicateArgs& args) {
  if (args.scenario.empty() == args.grid_file.empty())
    throw copulasurv::InputError(
        "exactly one of --scenario or --grid is required");

  json cells = json::array();
  if (!args.scenario.empty()) {
    cells.push_back(run_one_cell(copulasurv::find_scenario(args.scenario), args));
  } else {
    std::ifstream in(args.grid_file);
    if (!in)
      throw copulasurv::InputError("cannot open '" + args.grid_file + "'");
    json grid;
    try {
      in >> grid;
    } catch (const json::exception& e) {
      throw copulasurv::InputError(args.grid_file + ": " + e.what());
    }
    if (!grid.is_object() || !grid.contains("scenarios") ||
        !grid["scenarios"].is_array())
      throw copulasurv::InputError(
          args.grid_file + ": expected {\"scenarios\": [<name>, ...]}");
    for (const auto& [key, _] : grid.items())
      if (key != "scenarios")
        throw copulasurv::InputError(args.grid_file + ": unknown key '" + key +
                                     "'");
    for (const auto& name : grid["scenarios"])
      cells.push_back(
          run_one_cell(copulasurv::find_scenario(name.get<std::string>()), args));
  }

  std::cout << copulasurv::replication_table(cells);
  const std::string text = cells.dump(2) + "\n";
  std::cout << text;
  if (!args.json_out.empty()) {
    std::ofstream out(args.json_out);
    if (!out)
      throw copulasurv::InputError("cannot write '" + args.json_out + "'");
    out << text;
  }
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Archimedean copula models for clustered survival data"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "fit a copula model to a CSV dataset");
  fit->add_option("--data", fit_args.data_path, "input CSV")->required();
  fit->add_option("--copula", fit_args.copula, "clayton|gumbel|invgauss")
      ->required();
  fit->add_option("--method", fit_args.method,
                  "one-stage|two-stage|semiparam")
      ->required();
  fit->add_option("--jackknife-groups", fit_args.jackknife_groups,
                  "jackknife group count (default: one per cluster)");
  fit->add_option("--seed", fit_args.seed, "seed echoed into the report");
  fit->add_option("--threads", fit_args.threads, "worker threads");
  fit->add_option("--json-out", fit_args.json_out, "also write JSON here");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "generate CSV datasets");
  sim->add_option("--copula", sim_args.copula, "clayton|gumbel|invgauss");
  sim->add_option("--theta", sim_args.theta, "association parameter");
  sim->add_option("--clusters", sim_args.clusters, "number of clusters");
  sim->add_option("--size-min", sim_args.size_min, "minimum cluster size");
  sim->add_option("--size-max", sim_args.size_max, "maximum cluster size");
  sim->add_option("--lambda", sim_args.lambda, "Weibull scale");
  sim->add_option("--rho", sim_args.rho, "Weibull shape");
  sim->add_option("--beta", sim_args.beta, "covariate effect");
  sim->add_option("--censor-lambda", sim_args.censor_lambda,
                  "censoring Weibull scale (0 = no censoring)");
  sim->add_option("--censor-rho", sim_args.censor_rho,
                  "censoring Weibull shape");
  sim->add_option("--seed", sim_args.seed, "RNG seed");
  sim->add_option("--out", sim_args.out_dir, "output directory")->required();
  sim->add_option("--replicates", sim_args.replicates, "datasets to write");

  ReplicateArgs rep_args;
  auto* rep = app.add_subcommand("replicate", "run a simulation study cell");
  rep->add_option("--scenario", rep_args.scenario, "built-in scenario name");
  rep->add_option("--grid", rep_args.grid_file,
                  "JSON file {\"scenarios\": [names...]}");
  rep->add_option("--replicates", rep_args.replicates, "replicates per cell");
  rep->add_option("--threads", rep_args.threads, "worker threads");
  rep->add_option("--seed", rep_args.seed, "RNG seed");
  rep->add_option("--jackknife-groups", rep_args.jackknife_groups,
                  "jackknife grouping for semiparametric SEs");
  rep->add_option("--json-out", rep_args.json_out, "also write JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (fit->parsed()) return run_fit(fit_args);
    if (sim->parsed()) return run_simulate(sim_args);
    if (rep->parsed()) return run_replicate(rep_args);
  } catch (const copulasurv::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const copulasurv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
