#include <filesystem>
#include <fstream>
#include <sstream>

#include "chris/commands.hpp"
#include "chris/difficulty.hpp"
#include "chris/zoo.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace chris;

namespace {

const fs::path kRoot = fs::path(CHRIS_TEST_TMP) / "cli";

struct Result {
  int code;
  std::string out, err;
};

Result chris_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string dir(const std::string& name) { return (kRoot / name).string(); }

// Small trace shared by the tests below.
std::string trace() {
  static const std::string path = [] {
    const auto r = chris_run({"synth", "--windows-per-activity", "3", "--seed", "4", "--out", dir("trace")});
    REQUIRE(r.code == 0);
    return dir("trace") + "/trace.csv";
  }();
  return path;
}

std::string example_table() {
  zoo::Configuration a{ModelKind::AT, ModelKind::TimePPGBig, 9, Execution::Hybrid};
  a.avg_mae_bpm = 10.05;
  a.avg_watch_mj = 0.87;
  zoo::Configuration b{ModelKind::AT, ModelKind::TimePPGBig, 1, Execution::Local};
  b.avg_mae_bpm = 5.11;
  b.avg_watch_mj = 40.05;
  fs::create_directories(kRoot);
  const auto path = kRoot / "example_table.csv";
  zoo::save_table({{a, b}, "example", "deployment"}, path);
  return path.string();
}

}  // namespace

TEST_CASE("synth output is reproducible") {
  REQUIRE(chris_run({"synth", "--windows-per-activity", "2", "--seed", "9", "--out", dir("s1")}).code == 0);
  REQUIRE(chris_run({"synth", "--windows-per-activity", "2", "--seed", "9", "--out", dir("s2")}).code == 0);
  CHECK(slurp(dir("s1") + "/trace.csv") == slurp(dir("s2") + "/trace.csv"));
  CHECK_FALSE(slurp(dir("s1") + "/trace.csv").empty());
  const auto manifest = nlohmann::json::parse(slurp(dir("s1") + "/manifest.json"));
  CHECK(manifest["command"] == "synth");
  CHECK(manifest["inputs"]["seed"] == 9);
}

TEST_CASE("invalid arguments exit with status 1") {
  const auto hr = chris_run({"synth", "--hr", "400", "--out", dir("bad")});
  CHECK(hr.code == 1);
  CHECK(hr.err.find("InvalidHr") != std::string::npos);
  CHECK(chris_run({"simulate", "--trace", "/nonexistent.csv", "--out", dir("bad")}).code == 1);
  CHECK(chris_run({"frobnicate"}).code == 1);
  CHECK(chris_run({"simulate", "--trace", trace(), "--table", example_table(), "--constraint", "max-mae=-3",
                   "--oracle-classifier", "--out", dir("bad")})
            .code == 1);
}

TEST_CASE("train-rf writes a valid forest") {
  const auto r = chris_run({"train-rf", "--windows-per-activity", "20", "--seed", "2", "--out", dir("rf")});
  REQUIRE(r.code == 0);
  const auto forest = difficulty::forest_from_json(slurp(dir("rf") + "/forest.json"));
  CHECK(forest.trees.size() == 8);
  for (const auto& t : forest.trees) CHECK(t.depth() <= 5);
}

TEST_CASE("profile then pareto") {
  const auto p = chris_run({"profile", "--trace", trace(), "--oracle-classifier", "--models", "AT,TimePPG-Small",
                            "--fit-windows", "0", "--out", dir("prof")});
  REQUIRE(p.code == 0);
  const auto profiled = zoo::load_configs(dir("prof") + "/profiled.csv");
  CHECK(profiled.size() == 20);

  REQUIRE(chris_run({"pareto", "--input", dir("prof") + "/profiled.csv", "--out", dir("par")}).code == 0);
  const auto table = zoo::load_table(dir("par") + "/table.csv");
  CHECK(table.rows.size() <= profiled.size());
  CHECK_FALSE(table.rows.empty());
  for (const auto& a : table.rows) {
    for (const auto& b : table.rows) CHECK_FALSE(zoo::dominates(a, b));
  }
  const auto plot = slurp(dir("par") + "/pareto_plot.csv");
  CHECK(plot.rfind("avg_watch_mj,avg_mae_bpm,label,pareto\n", 0) == 0);
}

TEST_CASE("simulate honours the constraint") {
  const auto table = example_table();
  const auto r = chris_run({"simulate", "--trace", trace(), "--table", table, "--constraint", "max-mae=5.6",
                            "--oracle-classifier", "--fit-windows", "0", "--out", dir("sim")});
  REQUIRE(r.code == 0);
  const auto report = nlohmann::json::parse(slurp(dir("sim") + "/report.json"));
  REQUIRE(report["config_switches"].size() == 1);
  CHECK(report["config_switches"][0]["config"]["avg_mae_bpm"].get<double>() <= 5.6);
  CHECK(r.out.find("AT+TimePPG-Big/t1/Local") != std::string::npos);

  const auto soft = chris_run({"simulate", "--trace", trace(), "--table", table, "--constraint", "max-mae=1",
                               "--oracle-classifier", "--fit-windows", "0", "--out", dir("soft")});
  CHECK(soft.code == 2);
  CHECK(soft.out.find("soft-violation") != std::string::npos);
}

TEST_CASE("re-running from a manifest reproduces the report") {
  const auto table = example_table();
  fs::create_directories(kRoot);
  std::ofstream(kRoot / "outage.csv") << "start,end,status\n0,10,Connected\n10,20,Disconnected\n20,27,Connected\n";
  REQUIRE(chris_run({"simulate", "--trace", trace(), "--table", table, "--constraint", "max-mae=11",
                     "--schedule", (kRoot / "outage.csv").string(), "--oracle-classifier", "--fit-windows", "0",
                     "--seed", "3", "--out", dir("m1")})
              .code == 0);
  REQUIRE(chris_run({"simulate", "--manifest", dir("m1") + "/manifest.json", "--out", dir("m2")}).code == 0);
  CHECK(slurp(dir("m1") + "/report.json") == slurp(dir("m2") + "/report.json"));
  CHECK(slurp(dir("m1") + "/windows.csv") == slurp(dir("m2") + "/windows.csv"));

  // Wrong command for the manifest.
  CHECK(chris_run({"sweep", "--manifest", dir("m1") + "/manifest.json", "--out", dir("m3")}).code == 1);
}
