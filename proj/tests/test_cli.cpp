#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "tailnet/commands.hpp"
#include "tailnet/config.hpp"
#include "tailnet/error.hpp"
#include "tailnet/report.hpp"

using namespace tailnet;
namespace fs = std::filesystem;

namespace {

const char* kSingleNode = R"({
  "network": {
    "capacities": [3.0],
    "classes": [{"lambda": 0.5, "rate": 1.0, "alpha": 1.0, "beta": 1.2, "route": [0]}]
  },
  "simulation": {"horizon": 20000, "stride": 5, "seed": 11, "replications": 2, "workers": 2}
})";

const char* kExample1 = R"({
  "network": {
    "capacities": [5.0, 4.0],
    "classes": [
      {"lambda": 0.2, "rate": 1.0, "alpha": 1.0, "beta": 0.8, "route": [0]},
      {"lambda": 0.3, "rate": 1.3, "alpha": 1.0, "beta": 1.1, "route": [0, 1]},
      {"lambda": 0.4, "rate": 1.3, "alpha": 1.0, "beta": 1.1, "route": [1]}
    ]
  },
  "analysis": {"joint_nodes": [0, 1]},
  "simulation": {"horizon": 30000, "stride": 3, "seed": 5, "replications": 2}
})";

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("tailnet_test_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  fs::path write(const std::string& file, const std::string& text) const {
    std::ofstream(dir / file) << text;
    return dir / file;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parse errors carry line or field context") {
  CHECK(error_of("{\n  \"network\": {\n    \"capacities\": [1,\n}").find("cfg.json:4:") == 0);
  const std::string unknown = error_of(R"({"network": {"capacities": [1], "classes": []}, "simulaton": {}})");
  CHECK(unknown.find("simulaton") != std::string::npos);
  const std::string typo = error_of(
      R"({"network": {"capacities": [1], "classes": [{"lambda": 0.1, "rate": 1, "alpha": 1, "beta": 1, "rout": [0]}]}})");
  CHECK(typo.find("network.classes[0]") != std::string::npos);
  const std::string type = error_of(
      R"({"network": {"capacities": [1], "classes": [{"lambda": 0.1, "rate": 1, "alpha": 1, "beta": 1, "route": [0, "x"]}]}})");
  CHECK(type.find("network.classes[0].route[1]") != std::string::npos);
  CHECK(error_of(R"({"simulation": {}})").find("network") != std::string::npos);
}

TEST_CASE("parse_config reads every section") {
  const auto c = parse_config(R"({
    "network": {"capacities": [2, 3],
      "classes": [{"lambda": 0.1, "rate": 1, "alpha": 1, "beta": 1, "light_tailed": true, "route": [1, 0]}]},
    "analysis": {"kappa_cap": 9, "tail_window": [0.9, 0.999], "hill_k": 50, "verify_tolerance": 0.3},
    "simulation": {"horizon": 100, "warmup": 10, "stride": 2, "seed": 8, "weight_mode": "arrival",
                   "monitored_nodes": [1], "replications": 3, "workers": 2},
    "output": {"directory": "out", "formats": ["csv"]}
  })");
  CHECK(c.network.num_nodes() == 2);
  CHECK(c.network.traffic_class(0).duration.light_tailed);
  CHECK(c.network.traffic_class(0).route == std::vector<NodeId>{1, 0});
  CHECK(*c.analysis.kappa_cap == 9.0);
  CHECK(c.analysis.tail_lower == 0.9);
  CHECK(*c.analysis.hill_k == 50);
  CHECK(c.simulation.weight_mode == WeightMode::kArrival);
  CHECK(c.simulation.replication(0).warmup == 10);
  CHECK(c.simulation.replication(0).seed != c.simulation.replication(1).seed);
  CHECK(*c.output.directory == "out");
  CHECK(c.output.formats == std::vector<std::string>{"csv"});
}

TEST_CASE("check_config rejects inconsistent settings") {
  auto c = parse_config(kSingleNode);
  c.simulation.warmup = c.simulation.horizon + 1;
  CHECK_THROWS_AS(check_config(c), ConfigError);
  c = parse_config(kSingleNode);
  c.simulation.monitored_nodes = {4};
  CHECK_THROWS_AS(check_config(c), ConfigError);
  c = parse_config(kSingleNode);
  c.simulation.replications = 0;
  CHECK_THROWS_AS(check_config(c), ConfigError);
  c = parse_config(kSingleNode);
  c.analysis.joint_nodes = {2};
  CHECK_THROWS_AS(check_config(c), ConfigError);
}

TEST_CASE("validate exit codes") {
  Scratch s("validate");
  std::ostringstream out, err;
  CHECK(cmd_validate(s.write("ok.json", kExample1), {}, out, err) == kExitOk);
  CHECK(out.str().find("valid") != std::string::npos);

  std::string unstable = kSingleNode;
  unstable.replace(unstable.find("[3.0]"), 5, "[0.5]");
  std::ostringstream out2, err2;
  CHECK(cmd_validate(s.write("unstable.json", unstable), {}, out2, err2) == kExitConfig);
  CHECK(out2.str().find("UNSTABLE") != std::string::npos);

  std::string typo = kSingleNode;
  typo.replace(typo.find("\"route\": [0]"), 12, "\"route\": [3]");
  std::ostringstream out3, err3;
  CHECK(cmd_validate(s.write("typo.json", typo), {}, out3, err3) == kExitConfig);
  CHECK(err3.str().find("classes[0]") != std::string::npos);

  std::ostringstream out4, err4;
  CHECK(cmd_validate(s.dir / "missing.json", {}, out4, err4) == kExitConfig);
}

TEST_CASE("horizon below warmup is a config error") {
  Scratch s("warmup");
  std::string text = kSingleNode;
  text.replace(text.find("\"stride\""), 0, "\"warmup\": 30000, ");
  std::ostringstream out, err;
  CommandOptions opt;
  opt.out = s.dir / "out";
  CHECK(cmd_simulate(s.write("c.json", text), opt, out, err) == kExitConfig);
}

TEST_CASE("analyze writes the report for the single-node example") {
  Scratch s("analyze");
  CommandOptions opt;
  opt.out = s.dir / "out";
  std::ostringstream out, err;
  REQUIRE(cmd_analyze(s.write("c.json", kSingleNode), opt, out, err) == kExitOk);
  const auto report = parse_report_json(slurp(s.dir / "out" / "report.json"));
  REQUIRE(report.nodes.size() == 1);
  CHECK(report.nodes[0].kappa == doctest::Approx(3.6));
  CHECK(report.nodes[0].optima == std::vector<LongSessionProfile>{{3}});
  const std::string csv = slurp(s.dir / "out" / "analysis.csv");
  CHECK(csv.rfind(kCsvVersionLine, 0) == 0);
  CHECK(csv.find("(3)") != std::string::npos);
}

TEST_CASE("report JSON round-trips") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = test::random_network(rng, 3, 3);
    const auto report = analyze(spec);
    const auto back = parse_report_json(report_json(spec, report));
    REQUIRE(back.nodes.size() == report.nodes.size());
    for (std::size_t i = 0; i < back.nodes.size(); ++i) {
      const auto& a = report.nodes[i];
      const auto& b = back.nodes[i];
      CHECK(a.node == b.node);
      CHECK(a.feasible_found == b.feasible_found);
      CHECK(a.optima == b.optima);
      CHECK(a.kappa_cap == b.kappa_cap);
      CHECK(a.slack == b.slack);
      if (a.feasible_found) CHECK(a.kappa == b.kappa);
      REQUIRE(a.solutions.size() == b.solutions.size());
      for (std::size_t k = 0; k < a.solutions.size(); ++k) {
        CHECK(a.solutions[k].rate == b.solutions[k].rate);
        CHECK(a.solutions[k].load == b.solutions[k].load);
        CHECK(a.solutions[k].scale == b.solutions[k].scale);
      }
    }
  }
}

TEST_CASE("trace CSV round-trips") {
  const NetworkSpec spec({3.0, 2.0}, {test::heavy_class(0.5, 1.0, 1.0, 1.2, {0, 1})});
  SimConfig cfg;
  cfg.horizon = 5000;
  cfg.warmup = 100;
  cfg.stride = 3;
  const auto trace = run(spec, cfg);
  std::stringstream io;
  write_trace_csv(io, trace);
  CHECK(io.str().rfind(std::string(kCsvVersionLine) + "\nslot,node,workload\n", 0) == 0);
  const auto back = read_trace_csv(io);
  REQUIRE(back.size() == 2);
  for (const auto& node : trace.nodes) {
    const auto& rows = back.at(node.node);
    REQUIRE(rows.size() == node.workload.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].first == trace.slot_of(i));
      CHECK(rows[i].second == node.workload[i]);
    }
  }
  std::istringstream bad("slot,node,workload\n1,0,abc\n");
  CHECK_THROWS_AS(read_trace_csv(bad), ConfigError);
}

TEST_CASE("every command is byte-identical on rerun") {
  Scratch s("determinism");
  const auto cfg = s.write("c.json", kExample1);
  for (auto cmd : {cmd_validate, cmd_analyze, cmd_simulate, cmd_verify}) {
    std::string first_out;
    std::map<std::string, std::string> first_files;
    for (int pass = 0; pass < 2; ++pass) {
      const fs::path dir = s.dir / "out";
      fs::remove_all(dir);
      CommandOptions opt;
      opt.out = dir;
      std::ostringstream out, err;
      cmd(cfg, opt, out, err);
      std::map<std::string, std::string> files;
      if (fs::exists(dir))
        for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
      if (pass == 0) {
        first_out = out.str();
        first_files = files;
      } else {
        CHECK(out.str() == first_out);
        CHECK(files == first_files);
      }
    }
  }
}

TEST_CASE("simulate writes one trace per replication with distinct seeds") {
  Scratch s("simulate");
  CommandOptions opt;
  opt.out = s.dir / "out";
  std::ostringstream out, err;
  REQUIRE(cmd_simulate(s.write("c.json", kSingleNode), opt, out, err) == kExitOk);
  const auto r0 = slurp(s.dir / "out" / "trace_r0.csv");
  const auto r1 = slurp(s.dir / "out" / "trace_r1.csv");
  CHECK(!r0.empty());
  CHECK(r0 != r1);
  CHECK(fs::exists(s.dir / "out" / "trace_r0.summary.json"));
  CHECK(slurp(s.dir / "out" / "ccdf_node0.csv").find("z,ccdf") != std::string::npos);
}

TEST_CASE("seed override changes the traces") {
  Scratch s("seed");
  const auto cfg = s.write("c.json", kSingleNode);
  CommandOptions a, b;
  a.out = s.dir / "a";
  b.out = s.dir / "b";
  b.seed = 999;
  std::ostringstream out, err;
  REQUIRE(cmd_simulate(cfg, a, out, err) == kExitOk);
  REQUIRE(cmd_simulate(cfg, b, out, err) == kExitOk);
  CHECK(slurp(s.dir / "a" / "trace_r0.csv") != slurp(s.dir / "b" / "trace_r0.csv"));
}

TEST_CASE("verify flags an injected wrong exponent and short runs are inconclusive") {
  Scratch s("verify");
  std::string text = kSingleNode;
  text.replace(text.find("\"horizon\": 20000"), 16, "\"horizon\": 1000000");
  const auto cfg = s.write("c.json", text);
  CommandOptions opt;
  opt.out = s.dir / "out";
  opt.injected_kappa = 10.0;
  std::ostringstream out, err;
  CHECK(cmd_verify(cfg, opt, out, err) == kExitVerifyFailed);
  CHECK(slurp(s.dir / "out" / "verdict.csv").find("fail") != std::string::npos);

  std::string short_run = kSingleNode;
  short_run.replace(short_run.find("\"horizon\": 20000"), 16, "\"horizon\": 2000");
  CommandOptions plain;
  plain.out = s.dir / "short";
  std::ostringstream out2, err2;
  CHECK(cmd_verify(s.write("short.json", short_run), plain, out2, err2) == kExitOk);
  CHECK(slurp(s.dir / "short" / "verdict.csv").find("inconclusive") != std::string::npos);
}

TEST_CASE("output directory precedence") {
  auto c = parse_config(kSingleNode);
  CommandOptions opt;
  ::unsetenv("TAILNET_OUT");
  CHECK(output_directory(c, opt) == "tailnet-out");
  ::setenv("TAILNET_OUT", "from-env", 1);
  CHECK(output_directory(c, opt) == "from-env");
  c.output.directory = "from-config";
  CHECK(output_directory(c, opt) == "from-config");
  opt.out = "from-flag";
  CHECK(output_directory(c, opt) == "from-flag");
  ::unsetenv("TAILNET_OUT");
}
