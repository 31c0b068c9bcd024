#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "reachavoid/cli.hpp"
#include "reachavoid/io.hpp"
#include "support.hpp"

using namespace reachavoid;
namespace fs = std::filesystem;

namespace {

const std::string kData = TEST_DATA_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "reachavoid-tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string write_json(const std::string& name, const std::string& body) {
  const fs::path p = scratch(name);
  std::ofstream(p) << body;
  return p.string();
}

}  // namespace

TEST_CASE("kind command") {
  auto r = cli_run({"kind", "--scenario", kData + "/collinear_win.json"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("PursuitWins z=2.333333", 0) == 0);
  r = cli_run({"kind", "--scenario", kData + "/tangent_tie.json",
               "--coalition", "0", "--evader", "0"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("Tie z=", 0) == 0);
  r = cli_run({"kind", "--scenario", kData + "/malformed.json"});
  CHECK(r.code == cli::kInputError);
  r = cli_run({"kind", "--scenario", kData + "/collinear_win.json",
               "--coalition", "5"});
  CHECK(r.code == cli::kInputError);
  r = cli_run({"kind", "--scenario", kData + "/collinear_win.json",
               "--evader", "3"});
  CHECK(r.code == cli::kInputError);
  CHECK(cli_run({"kind", "--scenario", "/nonexistent.json"}).code ==
        cli::kInputError);
  CHECK(cli_run({"nonsense"}).code == cli::kInputError);
  CHECK(cli_run({}).code == cli::kInputError);
}

TEST_CASE("intercept command prints a certificate") {
  const auto r =
      cli_run({"intercept", "--scenario", kData + "/collinear_win.json"});
  CHECK(r.code == 0);
  CHECK(r.out.find("z=2.33333333") != std::string::npos);
  CHECK(r.out.find("multipliers=P0:-0.333333333") != std::string::npos);
  CHECK(r.out.find("active=P0") != std::string::npos);
}

TEST_CASE("schema errors carry the field path") {
  const std::string bad_speed = write_json("bad_speed.json", R"({
    "pursuers": [{"pos": [0, 0, 1], "speed": 0.5, "radius": 0}],
    "evaders": [{"pos": [0, 0, 3], "speed": 1, "policy": "straight"}],
    "region": "unbounded", "dt": 0.01, "seed": 1, "max_time": 20})");
  auto r = cli_run({"kind", "--scenario", bad_speed});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("$.evaders[0].speed") != std::string::npos);

  const std::string missing = write_json("missing.json", R"({
    "pursuers": [{"pos": [0, 0, 1], "speed": 2}],
    "evaders": [], "region": "unbounded", "dt": 0.01, "seed": 1,
    "max_time": 20})");
  r = cli_run({"simulate", "--scenario", missing});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("$.pursuers[0].radius") != std::string::npos);

  const std::string bad_policy = write_json("bad_policy.json", R"({
    "pursuers": [{"pos": [0, 0, 1], "speed": 2, "radius": 0}],
    "evaders": [{"pos": [0, 0, 3], "speed": 1, "policy": "teleport"}],
    "region": "unbounded", "dt": 0.01, "seed": 1, "max_time": 20})");
  r = cli_run({"kind", "--scenario", bad_policy});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("$.evaders[0].policy") != std::string::npos);

  const std::string captured = write_json("captured.json", R"({
    "pursuers": [{"pos": [0, 0, 1], "speed": 2, "radius": 3}],
    "evaders": [{"pos": [0, 0, 3], "speed": 1, "policy": "straight"}],
    "region": "unbounded", "dt": 0.01, "seed": 1, "max_time": 20})");
  r = cli_run({"kind", "--scenario", captured});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("$.evaders[0].pos") != std::string::npos);

  const std::string bad_ball = write_json("bad_ball.json", R"({
    "pursuers": [{"pos": [0, 0, 1], "speed": 2, "radius": 0}],
    "evaders": [{"pos": [0, 0, 3], "speed": 1, "policy": "straight"}],
    "region": {"ball": {"center": [0, 0, 9], "radius": 2}},
    "dt": 0.01, "seed": 1, "max_time": 20})");
  r = cli_run({"kind", "--scenario", bad_ball});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("$.region") != std::string::npos);
}

TEST_CASE("scenario documents round-trip exactly") {
  std::mt19937_64 rng(61);
  for (int k = 0; k < 20; ++k) {
    RandomScenarioOptions o;
    o.bounded = k % 2;
    Scenario sc = random_scenario(o, rng);
    sc.rematch_every = 1 + k % 3;
    sc.matcher = k % 3 ? MatcherKind::Sequential : MatcherKind::Exact;
    const fs::path p = scratch("roundtrip.json");
    io::save_scenario(sc, p.string());
    const Scenario back = io::load_scenario(p.string());
    REQUIRE(back.pursuers.size() == sc.pursuers.size());
    for (std::size_t i = 0; i < sc.pursuers.size(); ++i) {
      CHECK(back.pursuers[i].position == sc.pursuers[i].position);
      CHECK(back.pursuers[i].speed == sc.pursuers[i].speed);
      CHECK(back.pursuers[i].capture_radius == sc.pursuers[i].capture_radius);
    }
    REQUIRE(back.evaders.size() == sc.evaders.size());
    for (std::size_t j = 0; j < sc.evaders.size(); ++j) {
      CHECK(back.evaders[j].position == sc.evaders[j].position);
      CHECK(back.evaders[j].speed == sc.evaders[j].speed);
      CHECK(back.evader_policies[j] == sc.evader_policies[j]);
    }
    CHECK(back.region.kind == sc.region.kind);
    CHECK(back.region.center == sc.region.center);
    CHECK(back.region.radius == sc.region.radius);
    CHECK(back.dt == sc.dt);
    CHECK(back.seed == sc.seed);
    CHECK(back.max_time == sc.max_time);
    CHECK(back.matcher == sc.matcher);
    CHECK(back.rematch_every == sc.rematch_every);
    CHECK(back.capture_tolerance == sc.capture_tolerance);
    CHECK(io::scenario_to_json(back) == io::scenario_to_json(sc));
  }
}

TEST_CASE("graph documents round-trip") {
  std::mt19937_64 rng(62);
  for (int k = 0; k < 20; ++k) {
    const GameGraph g = testsupport::random_graph(rng, 5, 5, 0.2);
    const GameGraph back = io::graph_from_json(io::graph_to_json(g));
    CHECK(back.num_pursuers == g.num_pursuers);
    CHECK(back.coalitions == g.coalitions);
    CHECK(back.evaders == g.evaders);
    CHECK(back.edges == g.edges);
  }
  CHECK_THROWS_AS(io::graph_from_json(io::json::parse(
                      R"({"coalitions": [[0]], "evaders": [0], "edges": [[1, 0]]})")),
                  ScenarioError);
}

TEST_CASE("match command") {
  auto r = cli_run({"match", "--graph-file", kData + "/seven_evader_graph.json",
                    "--matcher", "both"});
  CHECK(r.code == 0);
  CHECK(r.out.find("sma size=3") != std::string::npos);
  CHECK(r.out.find("exact size=3") != std::string::npos);
  CHECK(r.out.find("ratio=1\n") != std::string::npos);

  r = cli_run({"match", "--scenario", kData + "/capture_1v1.json"});
  CHECK(r.code == 0);
  CHECK(r.out.find("sma size=1") != std::string::npos);

  r = cli_run({"match", "--graph-file", kData + "/seven_evader_graph.json",
               "--matcher", "exact", "--max-edges", "4"});
  CHECK(r.code == cli::kSizeGuard);
  r = cli_run({"match", "--graph-file", kData + "/seven_evader_graph.json",
               "--matcher", "greedy"});
  CHECK(r.code == cli::kInputError);
}

TEST_CASE("simulate writes trace and CSV") {
  const fs::path jsonl = scratch("cap.jsonl");
  const fs::path csv = scratch("cap.csv");
  auto r = cli_run({"simulate", "--scenario", kData + "/capture_1v1.json",
                    "--out", jsonl.string(), "--csv", csv.string()});
  CHECK(r.code == 0);
  CHECK(r.out == "{\"captured\":1,\"escaped\":0,\"remaining\":0}\n");

  std::ifstream in(jsonl);
  std::string line;
  std::vector<io::json> lines;
  while (std::getline(in, line)) lines.push_back(io::json::parse(line));
  REQUIRE(lines.size() >= 2);
  CHECK(lines.back()["type"] == "summary");
  CHECK(lines.back()["captured"] == 1);
  CHECK(lines.back()["events"].size() == 1);
  double last = -1;
  for (std::size_t k = 0; k + 1 < lines.size(); ++k) {
    CHECK(lines[k]["type"] == "frame");
    CHECK(lines[k]["t"].get<double>() > last);
    last = lines[k]["t"].get<double>();
  }
  const std::string table = slurp(csv);
  CHECK(table.rfind("time,role,id,x,y,z,event\n", 0) == 0);
  CHECK(table.find(",Captured\n") != std::string::npos);

  r = cli_run({"simulate", "--scenario", kData + "/escape_1v1.json"});
  CHECK(r.out == "{\"captured\":0,\"escaped\":1,\"remaining\":0}\n");
  r = cli_run({"simulate", "--scenario", kData + "/no_evaders.json", "--out",
               jsonl.string()});
  CHECK(r.code == 0);
  CHECK(slurp(jsonl).find("\"type\":\"frame\"") == std::string::npos);
}

TEST_CASE("simulate overrides dt, seed and time limit") {
  const fs::path a = scratch("ovr.jsonl");
  auto r = cli_run({"simulate", "--scenario", kData + "/capture_1v1.json",
                    "--dt", "0.05", "--max-time", "0.1", "--seed", "3",
                    "--out", a.string()});
  CHECK(r.code == 0);
  CHECK(r.out == "{\"captured\":0,\"escaped\":0,\"remaining\":1}\n");
  CHECK(cli_run({"simulate", "--scenario", kData + "/capture_1v1.json",
                 "--dt", "-1"})
            .code == cli::kInputError);
}

TEST_CASE("trace replay is byte-identical") {
  const fs::path scen = scratch("replay.json");
  std::mt19937_64 rng(63);
  RandomScenarioOptions o;
  o.policies = {EvaderPolicy::RandomWalk, EvaderPolicy::Optimal};
  o.max_time = 2;
  io::save_scenario(random_scenario(o, rng), scen.string());
  const fs::path a = scratch("a.jsonl"), b = scratch("b.jsonl");
  CHECK(cli_run({"simulate", "--scenario", scen.string(), "--out", a.string()})
            .code == 0);
  CHECK(cli_run({"simulate", "--scenario", scen.string(), "--out", b.string()})
            .code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK_FALSE(slurp(a).empty());
}

TEST_CASE("reduce3dm command") {
  const std::string inst =
      write_json("inst.json", R"({"m": 2, "triples": [[0,0,0],[1,1,1]]})");
  auto r = cli_run({"reduce3dm", "--instance", inst});
  CHECK(r.code == 0);
  CHECK(r.out == "m=2 triples=2 edges=2 matching=2 complete=yes\n");
  const std::string shared =
      write_json("shared.json", R"({"m": 2, "triples": [[0,0,0],[0,1,1]]})");
  r = cli_run({"reduce3dm", "--instance", shared});
  CHECK(r.out.find("complete=no") != std::string::npos);
  const std::string bad = write_json("bad3dm.json", R"({"m": 2, "triples": [[0,5,0]]})");
  CHECK(cli_run({"reduce3dm", "--instance", bad}).code == cli::kInputError);
  const fs::path out = scratch("red.json");
  r = cli_run({"reduce3dm", "--m", "3", "--triples", "5", "--seed", "2",
               "--out", out.string()});
  CHECK(r.code == 0);
  const auto doc = io::json::parse(slurp(out));
  CHECK(doc["complete"] == doc["three_dm_perfect"]);
}

TEST_CASE("bench command") {
  auto r = cli_run({"bench", "--instances", "0"});
  CHECK(r.code == 0);
  CHECK(r.out ==
        "instance,pursuers,evaders,edges,opt,sma,ratio,opt_singles,opt_pairs,"
        "opt_triples,build_ms,sma_ms,exact_ms\n");
  r = cli_run({"bench", "--instances", "30", "--seed", "5"});
  CHECK(r.code == 0);
  std::istringstream rows(r.out);
  std::string line;
  std::getline(rows, line);
  int n = 0;
  while (std::getline(rows, line)) {
    ++n;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    REQUIRE(f.size() == 13);
    const int opt = std::stoi(f[4]), sma = std::stoi(f[5]);
    CHECK(3 * sma >= opt);
    if (std::stoi(f[7]) == opt) CHECK(sma == opt);
  }
  CHECK(n == 30);
}
