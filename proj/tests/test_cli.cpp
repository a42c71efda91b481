#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "generators.hpp"
#include "rdu/cli.hpp"
#include "rdu/io.hpp"

namespace fs = std::filesystem;
using rdu::io::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run rdu_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = rdu::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("rdu_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double value_after(const std::string& text, const std::string& label) {
  const auto at = text.find(label + " ");
  REQUIRE(at != std::string::npos);
  return std::stod(text.substr(at + label.size() + 1));
}

const char* kCoin = R"([{"x": 0, "p": 0.5}, {"x": 10, "p": 0.5}])";

std::string small_production(int threshold) {
  return R"({"production": {"state": {"stock": 4, "observed_enemy": {"L": 1}},
    "threshold": )" + std::to_string(threshold) + R"(,
    "enemy": {"H": {"support": [[0, 0.5], [1, 0.5]]}, "L": {"support": [[0, 0.3], [1, 0.4], [2, 0.3]]},
              "R": {"support": [[0, 1]]}}},
    "phi": "logistic", "k": 20})";
}

}  // namespace

TEST_CASE("eval examples") {
  const std::string coin = write_file("coin.json", kCoin);
  Run r = rdu_cli({"eval", "--lottery", coin, "--phi", "identity"});
  CHECK(r.code == 0);
  CHECK(value_after(r.out, "RDU") == 5.0);
  CHECK(value_after(r.out, "EU") == 5.0);

  r = rdu_cli({"eval", "--lottery", coin, "--phi", "logistic", "--lambda", "10", "--shift", "1.3"});
  CHECK(r.code == 0);
  CHECK(std::abs(value_after(r.out, "RDU") - 10.0 / (1.0 + std::exp(3.0))) < 1e-13);
  CHECK(std::abs(value_after(r.out, "RDU") - 0.47426) < 1e-5);

  r = rdu_cli({"eval", "--lottery", coin, "--phi", "logistic:10:1.3"});
  CHECK(std::abs(value_after(r.out, "RDU") - 10.0 / (1.0 + std::exp(3.0))) < 1e-13);
  // Defaults are the pessimistic curve.
  CHECK(rdu_cli({"eval", "--lottery", coin, "--phi", "logistic"}).out == r.out);
}

TEST_CASE("eval with identity prints RDU equal to EU") {
  gen::Engine e(121);
  for (int trial = 0; trial < 50; ++trial) {
    const rdu::Lottery l = gen::lottery(e);
    const std::string path = write_file("lottery.json", rdu::io::to_json(l).dump());
    const Run r = rdu_cli({"eval", "--lottery", path});
    REQUIRE(r.code == 0);
    CHECK(std::abs(value_after(r.out, "RDU") - value_after(r.out, "EU")) < 1e-12);
  }
}

TEST_CASE("eval errors") {
  const std::string bad = write_file("bad.json", "[{\"x\": 0,\n \"p\": }]");
  Run r = rdu_cli({"eval", "--lottery", bad});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 2") != std::string::npos);
  CHECK(rdu_cli({"eval", "--lottery", write_file("c.json", kCoin), "--phi", "cubic"}).code == 2);
  CHECK(rdu_cli({"eval", "--lottery", (scratch_dir() / "missing.json").string()}).code == 2);
  CHECK(rdu_cli({"eval", "--lottery", write_file("c.json", kCoin), "--bogus"}).code == 2);
  CHECK(rdu_cli({"frobnicate"}).code == 2);
  CHECK(rdu_cli({}).code == 2);
}

TEST_CASE("help documents file schemas") {
  for (const char* cmd : {"eval", "solve", "coeffs", "match", "sweep"}) {
    const Run r = rdu_cli({cmd, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find('{') != std::string::npos);
  }
  CHECK(rdu_cli({"solve", "--help"}).out.find("\"decision_vars\"") != std::string::npos);
  CHECK(rdu_cli({"match", "--help"}).out.find("\"enemy_prior\"") != std::string::npos);
}

TEST_CASE("solve examples") {
  const std::string pinned = write_file("pinned.json", R"({
    "decision_vars": [{"name": "x", "lo": 0, "hi": 9}],
    "stochastic_vars": [{"name": "s", "support": [[0, 0.5], [1, 0.5]]}],
    "constraints": [{"kind": "eq", "terms": [[1, "x"]], "constant": 3}],
    "objective": {"targets": [{"decision": {"x": -1}, "stochastic": {"s": 1}}]}})");
  Run r = rdu_cli({"solve", "--instance", pinned, "--seed", "1", "--budget-iters", "200"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["feasible"] == true);
  CHECK(j["decision"]["x"] == 3);

  const std::string impossible = write_file("impossible.json", R"({
    "decision_vars": [{"name": "x", "lo": 0, "hi": 3}],
    "constraints": [{"kind": "eq", "terms": [[2, "x"]], "constant": 3}],
    "objective": {"targets": [{"decision": {"x": 1}}]}})");
  r = rdu_cli({"solve", "--instance", impossible, "--budget-iters", "300"});
  CHECK(r.code == 3);
  CHECK(json::parse(r.out)["feasible"] == false);

  CHECK(rdu_cli({"solve", "--instance", pinned, "--budget-ms", "5", "--budget-iters", "5"}).code == 2);
  CHECK(rdu_cli({"solve", "--instance", pinned, "--budget-iters", "0"}).code == 2);
}

TEST_CASE("solve on a production instance matches the exhaustive oracle") {
  const std::string inst = write_file("prod2.json", small_production(2));
  const Run fast = rdu_cli({"solve", "--instance", inst, "--seed", "5", "--budget-iters", "50000"});
  const Run full = rdu_cli({"solve", "--instance", inst, "--seed", "5", "--exhaustive"});
  REQUIRE(fast.code == 0);
  REQUIRE(full.code == 0);
  const json a = json::parse(fast.out);
  const json b = json::parse(full.out);
  CHECK(std::abs(a["rdu"].get<double>() - b["rdu"].get<double>()) < 1e-9);
  CHECK(b["production"]["plan"].is_object());
  CHECK(fast.err.find("build") != std::string::npos);

  const Run big = rdu_cli({"solve", "--instance", write_file("prod20.json", small_production(20)), "--exhaustive"});
  CHECK(big.code == 2);
  CHECK(big.err.find("InstanceTooLarge") != std::string::npos);
}

TEST_CASE("solve is reproducible") {
  const std::string inst = write_file("prod4.json", small_production(4));
  const Run a = rdu_cli({"solve", "--instance", inst, "--seed", "8", "--budget-iters", "2000"});
  const Run b = rdu_cli({"solve", "--instance", inst, "--seed", "8", "--budget-iters", "2000"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("coeffs") {
  const Run r = rdu_cli({"coeffs"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  for (int a = 0; a < 3; ++a) {
    CHECK(j["need"][a][a] == 1.0);
    for (int b = 0; b < 3; ++b) {
      CHECK(std::abs(j["need"][a][b].get<double>() * j["need"][b][a].get<double>() - 1.0) < 1e-6);
    }
  }
  CHECK(j["reciprocity_ok"] == true);

  const Run once = rdu_cli({"coeffs", "--games", "1", "--seed", "12"});
  CHECK(once.code == 0);
  CHECK(rdu_cli({"coeffs", "--games", "1", "--seed", "12"}).out == once.out);

  CHECK(rdu_cli({"coeffs", "--games", "0"}).code == 2);
  const std::string stats = write_file("stats.json", R"({"multiplier": [[1, 0.5, 1], [2, 1, 1], [1, 1, 1]]})");
  CHECK(rdu_cli({"coeffs", "--stats", stats}).code == 2);
}

TEST_CASE("match") {
  const std::string csv = (scratch_dir() / "games.csv").string();
  const std::string summary = (scratch_dir() / "summary.json").string();
  const Run r = rdu_cli({"match", "--bot-a", "random", "--bot-b", "rush", "--games", "6", "--seed", "2",
                         "--out", csv, "--summary", summary});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("normalized") != std::string::npos);
  const std::string text = read_file(csv);
  CHECK(text.rfind("game_index,seed,side_assignment,outcome,ticks,final_units_A,final_units_B\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
  const json s = json::parse(read_file(summary));
  const json& row = s["rows"][0];
  CHECK(row["wins"].get<int>() + row["ties"].get<int>() + row["losses"].get<int>() == 6);
  CHECK(row["score"].get<double>() == row["wins"].get<int>() + 0.5 * row["ties"].get<int>());

  // CSV on standard output when --out is absent, identical across runs and job counts.
  const Run a = rdu_cli({"match", "--games", "8", "--seed", "1"});
  const Run b = rdu_cli({"match", "--games", "8", "--seed", "1", "--jobs", "3"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("game_index", 0) == 0);

  CHECK(rdu_cli({"match", "--games", "0"}).code == 2);
  CHECK(rdu_cli({"match", "--bot-a", "wizard"}).code == 2);
  CHECK(rdu_cli({"match", "--scenario", write_file("sc.json", R"({"max_ticks": -1})")}).code == 2);
}

TEST_CASE("sweep") {
  const Run s = rdu_cli({"sweep", "--phis", "rdu-opt", "--opponent", "rush", "--games", "6", "--seed", "3"});
  REQUIRE(s.code == 0);
  const std::string summary = (scratch_dir() / "sweep_summary.json").string();
  const Run m = rdu_cli({"match", "--bot-a", "rdu-opt", "--bot-b", "rush", "--games", "6", "--seed", "3",
                         "--out", (scratch_dir() / "sweep.csv").string(), "--summary", summary});
  REQUIRE(m.code == 0);
  const json row = json::parse(read_file(summary))["rows"][0];
  std::ostringstream want;
  want << "phi,wins,ties,losses,score,normalized_score\n"
       << "rdu-opt," << row["wins"].get<int>() << ',' << row["ties"].get<int>() << ','
       << row["losses"].get<int>() << ',' << row["score"].get<double>() << ','
       << row["normalized_score"].get<double>() << '\n';
  CHECK(s.out == want.str());

  const Run two = rdu_cli({"sweep", "--phis", "identity,logit:10", "--games", "2"});
  CHECK(two.code == 0);
  CHECK(std::count(two.out.begin(), two.out.end(), '\n') == 3);

  CHECK(rdu_cli({"sweep", "--phis", ","}).code == 2);
  CHECK(rdu_cli({"sweep", "--phis", "logistic:abc"}).code == 2);
  CHECK(rdu_cli({"sweep"}).code == 2);
}

TEST_CASE("the binary passes exit codes through") {
  const std::string bin = RDU_BINARY;
  CHECK(std::system((bin + " match --games 2 --seed 1 > /dev/null 2>&1").c_str()) == 0);
  const int status = std::system((bin + " match --games 0 > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
