#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "copulasurv/csv_io.hpp"
#include "copulasurv/errors.hpp"
#include "copulasurv/report.hpp"
#include "copulasurv/scenarios.hpp"

using namespace copulasurv;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
  if (const char* p = std::getenv("COPULASURV_CLI_PATH")) return p;
  return COPULASURV_CLI_PATH; // baked in at build time
}

fs::path temp_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("copulasurv_test_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "out.txt";
  const std::string cmd =
      cli_path() + " " + args + " > " + out.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(raw), ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("csv round trip preserves the dataset") {
  Dataset data;
  data.covariate_names = {"z", "age"};
  data.clusters.push_back(Cluster{
      "fam1",
      {Subject{1.25, 1, {1.0, 62.5}}, Subject{0.3333333333333, 0, {0.0, 41.0}}}});
  data.clusters.push_back(Cluster{"fam2", {Subject{2.0, 1, {1.0, 55.0}}}});
  std::stringstream ss;
  write_dataset_csv(data, ss);
  const Dataset back = read_dataset_csv(ss, "roundtrip");
  REQUIRE(back.n_clusters() == 2);
  CHECK(back.covariate_names == data.covariate_names);
  CHECK(back.clusters[0].id == "fam1");
  CHECK(back.clusters[0].subjects[1].time ==
        doctest::Approx(0.3333333333333).epsilon(1e-12));
  CHECK(back.clusters[0].subjects[1].covariates[1] == 41.0);
  CHECK(back.clusters[1].subjects[0].status == 1);
}

TEST_CASE("csv parser groups rows by first appearance") {
  std::stringstream ss("cluster,time,status\nb,1,1\na,2,0\nb,3,1\n");
  const Dataset data = read_dataset_csv(ss, "grouping");
  REQUIRE(data.n_clusters() == 2);
  CHECK(data.clusters[0].id == "b");
  CHECK(data.clusters[0].size() == 2);
  CHECK(data.clusters[1].id == "a");
}

TEST_CASE("csv parser reports the offending line") {
  std::stringstream bad_header("time,status\n1,1\n");
  CHECK_THROWS_AS(read_dataset_csv(bad_header, "h"), InputError);

  std::stringstream bad_status("cluster,time,status\na,1.0,2\n");
  try {
    read_dataset_csv(bad_status, "s");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("s:2:") != std::string::npos);
  }

  std::stringstream bad_time("cluster,time,status\na,xyz,1\n");
  CHECK_THROWS_AS(read_dataset_csv(bad_time, "t"), InputError);

  std::stringstream ragged("cluster,time,status,z\na,1.0,1\n");
  CHECK_THROWS_AS(read_dataset_csv(ragged, "r"), InputError);
}

TEST_CASE("builtin scenario names resolve and reject") {
  const auto& all = builtin_scenarios();
  CHECK(all.size() == (4 + 3) * 2 * 3);
  const auto& s = find_scenario("clayton-t0.5-K200-c0");
  CHECK(s.config.family.kind == CopulaFamily::Clayton);
  CHECK(s.config.family.theta == 0.5);
  CHECK(s.config.n_clusters == 200);
  CHECK(!s.config.censoring.has_value());
  const auto& c = find_scenario("gumbel-t0.8-K50-c25");
  CHECK(c.config.censoring.has_value());
  CHECK(c.config.censoring->lambda_c == doctest::Approx(0.0274));
  CHECK_THROWS_AS(find_scenario("no-such-cell"), InputError);
}

TEST_CASE("simulate then fit through the CLI") {
  const auto dir = temp_dir("fit");
  auto sim = run_cli("simulate --copula clayton --theta 1.0 --clusters 150 "
                     "--size-max 6 --seed 5 --out " +
                         (dir / "sim").string(),
                     dir);
  REQUIRE_MESSAGE(sim.exit_code == 0, sim.output);
  REQUIRE(fs::exists(dir / "sim" / "sim_0000.csv"));
  const json manifest = json::parse(slurp(dir / "sim" / "manifest.json"));
  CHECK(manifest["files"].size() == 1);
  CHECK(manifest["config"]["theta"] == 1.0);

  auto fit = run_cli("fit --data " + (dir / "sim" / "sim_0000.csv").string() +
                         " --copula clayton --method two-stage --json-out " +
                         (dir / "fit.json").string(),
                     dir);
  REQUIRE_MESSAGE(fit.exit_code == 0, fit.output);
  const json report = json::parse(slurp(dir / "fit.json"));
  CHECK(report["schema_version"] == kReportSchemaVersion);
  CHECK(report["method"] == "two-stage");
  CHECK(report["copula"] == "clayton");
  CHECK(report["converged"] == true);
  const double theta = report["estimates"]["theta"];
  CHECK(theta > 0.3);
  CHECK(theta < 2.5);
  CHECK(report["standard_errors"]["theta"].get<double>() > 0.0);
  CHECK(report["n_clusters"] == 150);
  // stdout carries the same JSON
  CHECK(json::parse(fit.output) == report);
  fs::remove_all(dir);
}

TEST_CASE("cli rejects bad input with exit code 1") {
  const auto dir = temp_dir("bad");
  CHECK(run_cli("fit --data /nonexistent.csv --copula clayton "
                "--method two-stage",
                dir)
            .exit_code == 1);
  {
    std::ofstream csv(dir / "ok.csv");
    csv << "cluster,time,status,z\na,1.0,1,0\na,2.0,1,1\n";
  }
  CHECK(run_cli("fit --data " + (dir / "ok.csv").string() +
                    " --copula cauchy --method two-stage",
                dir)
            .exit_code == 1);
  CHECK(run_cli("fit --data " + (dir / "ok.csv").string() +
                    " --copula clayton --method mystery",
                dir)
            .exit_code == 1);
  CHECK(run_cli("replicate --scenario nope --replicates 1", dir).exit_code ==
        1);
  CHECK(run_cli("replicate --replicates 1", dir).exit_code == 1);
  fs::remove_all(dir);
}

TEST_CASE("replicate output is byte-identical across thread counts") {
  const auto dir = temp_dir("rep");
  {
    std::ofstream grid(dir / "grid.json");
    grid << R"({"scenarios": ["clayton-t1-K50-c0"]})";
  }
  auto r1 = run_cli("replicate --grid " + (dir / "grid.json").string() +
                        " --replicates 4 --seed 12 --threads 1 --json-out " +
                        (dir / "r1.json").string(),
                    dir);
  REQUIRE_MESSAGE(r1.exit_code == 0, r1.output);
  auto r8 = run_cli("replicate --grid " + (dir / "grid.json").string() +
                        " --replicates 4 --seed 12 --threads 8 --json-out " +
                        (dir / "r8.json").string(),
                    dir);
  REQUIRE_MESSAGE(r8.exit_code == 0, r8.output);
  CHECK(slurp(dir / "r1.json") == slurp(dir / "r8.json"));

  const json cells = json::parse(slurp(dir / "r1.json"));
  REQUIRE(cells.is_array());
  REQUIRE(cells.size() == 1);
  CHECK(cells[0]["scenario"] == "clayton-t1-K50-c0");
  CHECK(cells[0]["replicates"] == 4);
  // the table header shows up in stdout before the JSON
  CHECK(r1.output.find("scenario") != std::string::npos);

  {
    std::ofstream grid(dir / "grid.json");
    grid << R"({"scenarios": ["clayton-t1-K50-c0"], "bogus": 1})";
  }
  CHECK(run_cli("replicate --grid " + (dir / "grid.json").string() +
                    " --replicates 1",
                dir)
            .exit_code == 1);
  fs::remove_all(dir);
}
