#include "tailnet/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "tailnet/error.hpp"

namespace tailnet {

using nlohmann::json;

KnapsackOptions AnalysisConfig::knapsack() const {
  KnapsackOptions k;
  k.tol_feas = tol_feas;
  k.kappa_cap = kappa_cap;
  k.solver.tol = tol;
  k.solver.max_iter = max_iter;
  k.solver.damping = damping;
  return k;
}

TailOptions AnalysisConfig::tail() const {
  TailOptions t;
  t.lower_quantile = tail_lower;
  t.upper_quantile = tail_upper;
  t.hill_k = hill_k;
  return t;
}

SimConfig SimulationConfig::replication(std::size_t i) const {
  SimConfig c;
  c.horizon = horizon;
  c.warmup = warmup.value_or(horizon / 5);
  c.stride = stride;
  c.seed = replication_seed(seed, i);
  c.monitored = monitored_nodes;
  c.weight_mode = weight_mode;
  c.session_limit = session_limit;
  return c;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      fail(path + "." + key, "unknown field");
  }
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

long long get_integer(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<long long>(d))) return static_cast<long long>(d);
  }
  fail(path, "expected an integer");
}

NodeId get_node(const json& v, const std::string& path) {
  const long long id = get_integer(v, path);
  if (id < 0) fail(path, "node ids are non-negative");
  return static_cast<NodeId>(id);
}

std::vector<NodeId> get_nodes(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of node ids");
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_node(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

NetworkSpec parse_network(const json& j) {
  only_keys(j, "network", {"capacities", "classes"});
  if (!j.contains("capacities") || !j["capacities"].is_array()) fail("network.capacities", "expected an array");
  if (!j.contains("classes") || !j["classes"].is_array()) fail("network.classes", "expected an array");

  std::vector<double> capacities;
  for (std::size_t i = 0; i < j["capacities"].size(); ++i)
    capacities.push_back(get_number(j["capacities"][i], "network.capacities[" + std::to_string(i) + "]"));

  std::vector<TrafficClass> classes;
  for (std::size_t n = 0; n < j["classes"].size(); ++n) {
    const std::string path = "network.classes[" + std::to_string(n) + "]";
    const json& c = j["classes"][n];
    only_keys(c, path, {"lambda", "rate", "alpha", "beta", "light_tailed", "route"});
    for (const char* required : {"lambda", "rate", "alpha", "beta", "route"})
      if (!c.contains(required)) fail(path + "." + required, "missing field");
    TrafficClass tc;
    tc.lambda = get_number(c["lambda"], path + ".lambda");
    tc.rate = get_number(c["rate"], path + ".rate");
    tc.duration.alpha = get_number(c["alpha"], path + ".alpha");
    tc.duration.beta = get_number(c["beta"], path + ".beta");
    if (c.contains("light_tailed")) {
      if (!c["light_tailed"].is_boolean()) fail(path + ".light_tailed", "expected true or false");
      tc.duration.light_tailed = c["light_tailed"].get<bool>();
    }
    tc.route = get_nodes(c["route"], path + ".route");
    classes.push_back(std::move(tc));
  }
  return NetworkSpec(std::move(capacities), std::move(classes));
}

AnalysisConfig parse_analysis(const json& j) {
  only_keys(j, "analysis",
            {"kappa_cap", "tol_feas", "tol", "max_iter", "damping", "joint_nodes", "tail_window", "hill_k",
             "verify_tolerance"});
  AnalysisConfig a;
  if (j.contains("kappa_cap") && !j["kappa_cap"].is_null()) a.kappa_cap = get_number(j["kappa_cap"], "analysis.kappa_cap");
  if (j.contains("tol_feas")) a.tol_feas = get_number(j["tol_feas"], "analysis.tol_feas");
  if (j.contains("tol")) a.tol = get_number(j["tol"], "analysis.tol");
  if (j.contains("max_iter")) a.max_iter = static_cast<long>(get_integer(j["max_iter"], "analysis.max_iter"));
  if (j.contains("damping")) a.damping = get_number(j["damping"], "analysis.damping");
  if (j.contains("joint_nodes")) a.joint_nodes = get_nodes(j["joint_nodes"], "analysis.joint_nodes");
  if (j.contains("tail_window")) {
    const json& w = j["tail_window"];
    if (!w.is_array() || w.size() != 2) fail("analysis.tail_window", "expected [lower, upper]");
    a.tail_lower = get_number(w[0], "analysis.tail_window[0]");
    a.tail_upper = get_number(w[1], "analysis.tail_window[1]");
  }
  if (j.contains("hill_k") && !j["hill_k"].is_null()) {
    const long long k = get_integer(j["hill_k"], "analysis.hill_k");
    if (k <= 0) fail("analysis.hill_k", "must be positive");
    a.hill_k = static_cast<std::size_t>(k);
  }
  if (j.contains("verify_tolerance")) a.verify_tolerance = get_number(j["verify_tolerance"], "analysis.verify_tolerance");
  return a;
}

SimulationConfig parse_simulation(const json& j) {
  only_keys(j, "simulation",
            {"horizon", "warmup", "stride", "seed", "weight_mode", "monitored_nodes", "replications", "session_limit",
             "workers"});
  SimulationConfig s;
  if (j.contains("horizon")) s.horizon = get_integer(j["horizon"], "simulation.horizon");
  if (j.contains("warmup") && !j["warmup"].is_null()) s.warmup = get_integer(j["warmup"], "simulation.warmup");
  if (j.contains("stride")) s.stride = get_integer(j["stride"], "simulation.stride");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("simulation.seed", "expected a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("weight_mode")) {
    if (!j["weight_mode"].is_string()) fail("simulation.weight_mode", "expected a string");
    try {
      s.weight_mode = parse_weight_mode(j["weight_mode"].get<std::string>());
    } catch (const ConfigError& e) {
      fail("simulation.weight_mode", e.what());
    }
  }
  if (j.contains("monitored_nodes")) s.monitored_nodes = get_nodes(j["monitored_nodes"], "simulation.monitored_nodes");
  if (j.contains("replications"))
    s.replications = static_cast<int>(get_integer(j["replications"], "simulation.replications"));
  if (j.contains("session_limit")) s.session_limit = get_integer(j["session_limit"], "simulation.session_limit");
  if (j.contains("workers")) s.workers = static_cast<int>(get_integer(j["workers"], "simulation.workers"));
  return s;
}

OutputConfig parse_output(const json& j) {
  only_keys(j, "output", {"directory", "formats"});
  OutputConfig o;
  if (j.contains("directory")) {
    if (!j["directory"].is_string()) fail("output.directory", "expected a string");
    o.directory = j["directory"].get<std::string>();
  }
  if (j.contains("formats")) {
    if (!j["formats"].is_array()) fail("output.formats", "expected an array");
    o.formats.clear();
    for (std::size_t i = 0; i < j["formats"].size(); ++i) {
      const json& f = j["formats"][i];
      const std::string path = "output.formats[" + std::to_string(i) + "]";
      if (!f.is_string()) fail(path, "expected a string");
      const auto name = f.get<std::string>();
      if (name != "json" && name != "csv") fail(path, "unknown format '" + name + "' (expected json or csv)");
      o.formats.push_back(name);
    }
  }
  return o;
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
    if (auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw ConfigError(source + ":" + line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + msg);
  }
  try {
    only_keys(root, "config", {"network", "analysis", "simulation", "output"});
    if (!root.contains("network")) fail("network", "missing section");
    RunConfig config;
    config.network = parse_network(root["network"]);
    if (root.contains("analysis")) config.analysis = parse_analysis(root["analysis"]);
    if (root.contains("simulation")) config.simulation = parse_simulation(root["simulation"]);
    if (root.contains("output")) config.output = parse_output(root["output"]);
    return config;
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

void check_config(const RunConfig& config) {
  const auto& a = config.analysis;
  const auto& s = config.simulation;
  const std::size_t M = config.network.num_nodes();
  auto node_ok = [&](const std::vector<NodeId>& nodes, const std::string& path) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] >= M)
        fail(path + "[" + std::to_string(i) + "]", "node " + std::to_string(nodes[i]) + " does not exist");
  };
  node_ok(a.joint_nodes, "analysis.joint_nodes");
  node_ok(s.monitored_nodes, "simulation.monitored_nodes");

  if (a.kappa_cap && !(*a.kappa_cap > 0.0)) fail("analysis.kappa_cap", "must be positive");
  if (!(a.tol_feas > 0.0)) fail("analysis.tol_feas", "must be positive");
  if (!(a.tol > 0.0)) fail("analysis.tol", "must be positive");
  if (a.max_iter <= 0) fail("analysis.max_iter", "must be positive");
  if (!(a.damping > 0.0 && a.damping <= 1.0)) fail("analysis.damping", "must lie in (0, 1]");
  if (!(a.tail_lower > 0.0 && a.tail_lower < a.tail_upper && a.tail_upper < 1.0))
    fail("analysis.tail_window", "must satisfy 0 < lower < upper < 1");
  if (!(a.verify_tolerance > 0.0)) fail("analysis.verify_tolerance", "must be positive");

  if (s.horizon <= 0) fail("simulation.horizon", "must be positive");
  const long long warmup = s.warmup.value_or(s.horizon / 5);
  if (warmup < 0) fail("simulation.warmup", "must be non-negative");
  if (warmup >= s.horizon) fail("simulation.warmup", "must be smaller than the horizon");
  if (s.stride <= 0) fail("simulation.stride", "must be positive");
  if (s.replications < 1) fail("simulation.replications", "must be at least 1");
  if (s.session_limit <= 0) fail("simulation.session_limit", "must be positive");
  if (s.workers < 1) fail("simulation.workers", "must be at least 1");
}

}  // namespace tailnet
