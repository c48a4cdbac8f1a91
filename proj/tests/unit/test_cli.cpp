#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::temp_directory_path() / "epislfv_cli_tests";

int run(const std::string& args, const std::string& tag) {
  fs::create_directories(kScratch);
  const std::string cmd = std::string(EPISLFV_CLI_PATH) + " " + args + " > " + (kScratch / (tag + ".out")).string() +
                          " 2> " + (kScratch / (tag + ".err")).string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kScratch);
  const fs::path p = kScratch / name;
  std::ofstream(p) << text;
  return p;
}

const char* kForward = R"({
  "gamma": 1.0,
  "law": {"d": 2, "atoms": [{"rate": 0.2, "radius": 2, "impact": 0.3}]},
  "region": {"L": [20, 20], "boundary": "torus"},
  "h": 1.0,
  "init": {"kind": "epidemic", "mask": {"type": "ball", "center": [10, 10], "radius": 4}, "level": 0.9},
  "horizon": 2.0,
  "probes": [{"id": "all", "times": [0, 1, 2]}],
  "snapshot_times": [1.0],
  "replicates": 3,
  "master_seed": 5
})";

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("", "none") == 2);
  CHECK(run("forward-run --no-such-flag", "flag") == 2);
  CHECK(slurp(kScratch / "flag.err").find("Usage") != std::string::npos);
  CHECK(run("forward-run --boundary sphere", "boundary") == 2);
}

TEST_CASE("bad configs exit nonzero with an error document") {
  const auto bad = write_config("bad.json", R"({"gamma": 1.0})");
  CHECK(run("forward-run --config " + bad.string() + " --out " + (kScratch / "bad").string(), "bad") == 1);
  const auto err = nlohmann::json::parse(slurp(kScratch / "bad.err"));
  CHECK(err.contains("error"));
  CHECK(err.at("command") == "forward-run");
  CHECK(run("forward-run --config /no/such/file.json", "missing") == 1);
}

TEST_CASE("forward run writes trajectories and a manifest") {
  const auto cfg = write_config("forward.json", kForward);
  const fs::path out = kScratch / "fwd";
  fs::remove_all(out);
  REQUIRE(run("forward-run --config " + cfg.string() + " --out " + out.string(), "fwd") == 0);
  const std::string csv = slurp(out / "trajectory.csv");
  CHECK(csv.rfind("replicate,t,probe_id,infected_mass\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 3);
  CHECK(fs::exists(out / "snapshot_0.txt"));
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  for (const char* key : {"command", "config", "seed", "version"}) CHECK(manifest.contains(key));

  // rerunning from the manifest's config reproduces the csv byte for byte
  const auto again = write_config("again.json", manifest.at("config").dump());
  const fs::path out2 = kScratch / "fwd2";
  REQUIRE(run("forward-run --config " + again.string() + " --out " + out2.string(), "fwd2") == 0);
  CHECK(slurp(out2 / "trajectory.csv") == csv);
}

TEST_CASE("r0 command") {
  const auto cfg = write_config("r0.json", R"({"gamma": 20, "law": {"d": 2, "atoms": [{"rate": 0.05, "radius": 100, "impact": 0.1}]}, "h": 1.0})");
  REQUIRE(run("r0 --config " + cfg.string(), "r0") == 0);
  const auto j = nlohmann::json::parse(slurp(kScratch / "r0.out"));
  CHECK(j.at("r0").get<double>() == doctest::Approx(7.854).epsilon(1e-4));
  CHECK(j.contains("r0_grid"));
}

TEST_CASE("coupling and duality commands") {
  const auto cfg = write_config("beta.json", R"({"kind": "beta", "gamma": 1, "beta": 2, "horizon": 2, "runs": 5,
    "law": {"d": 2, "atoms": [{"rate": 1, "radius": 2, "impact": 0.4}]}})");
  REQUIRE(run("coupling-check --config " + cfg.string() + " --out " + (kScratch / "beta").string(), "beta") == 0);
  const auto report = nlohmann::json::parse(slurp(kScratch / "beta" / "violation_report.json"));
  CHECK(report.at("violations") == 0);
  CHECK(report.at("runs") == 5);

  const auto dcfg = write_config("dual.json", R"({"cases": [{
    "name": "c1", "gamma": 1.0, "t": 0.5,
    "law": {"d": 2, "atoms": [{"rate": 0.2, "radius": 2, "impact": 0.5}]},
    "region": {"L": [16, 16], "boundary": "torus"},
    "init": {"kind": "epidemic", "mask": {"type": "ball", "center": [8, 8], "radius": 3}, "level": 0.9},
    "samples": [[8.5, 8.5]], "forward_replicates": 500, "dual_replicates": 500}]})");
  REQUIRE(run("duality-check --config " + dcfg.string() + " --out " + (kScratch / "dual").string(), "dual") == 0);
  const auto dual = nlohmann::json::parse(slurp(kScratch / "dual" / "duality_report.json"));
  CHECK(dual.dump().find("\"z\"") != std::string::npos);
}
