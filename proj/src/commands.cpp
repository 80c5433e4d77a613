#include "tailnet/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <ostream>
#include <thread>

#include "tailnet/error.hpp"

namespace tailnet {

namespace fs = std::filesystem;

namespace {

/// Six significant digits for terminal tables; files keep full precision.
std::string short_number(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

}  // namespace

void apply_overrides(RunConfig& config, const CommandOptions& options) {
  if (options.seed) config.simulation.seed = *options.seed;
  if (options.workers) config.simulation.workers = *options.workers;
  if (options.kappa_cap) config.analysis.kappa_cap = *options.kappa_cap;
  if (options.weight_mode) config.simulation.weight_mode = *options.weight_mode;
}

fs::path output_directory(const RunConfig& config, const CommandOptions& options) {
  if (options.out) return *options.out;
  if (config.output.directory) return *config.output.directory;
  if (const char* env = std::getenv("TAILNET_OUT"); env && *env) return env;
  return "tailnet-out";
}

std::vector<SimTrace> simulate_replications(const NetworkSpec& spec, const SimulationConfig& sim) {
  const auto count = static_cast<std::size_t>(sim.replications);
  std::vector<SimTrace> traces(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        traces[i] = run(spec, sim.replication(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, sim.workers)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return traces;
}

std::vector<VerdictRow> judge(const ExponentReport& report, const std::vector<SimTrace>& traces,
                              const AnalysisConfig& analysis, std::optional<double> injected_kappa) {
  std::vector<VerdictRow> rows;
  if (traces.empty()) return rows;
  const auto options = analysis.tail();
  for (std::size_t i = 0; i < traces.front().nodes.size(); ++i) {
    std::vector<double> pooled;
    for (const auto& t : traces) pooled.insert(pooled.end(), t.nodes[i].workload.begin(), t.nodes[i].workload.end());
    VerdictRow row;
    row.node = traces.front().nodes[i].node;
    row.predicted = injected_kappa.value_or(report.nodes.at(row.node).kappa);
    row.ccdf = fit_ccdf_regression(pooled, options);
    row.hill = fit_hill(pooled, options);
    row.verdict = compare(row.ccdf, row.predicted, analysis.verify_tolerance);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

bool wants(const RunConfig& config, const char* format) {
  const auto& f = config.output.formats;
  return std::find(f.begin(), f.end(), format) != f.end();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

fs::path prepare_directory(const RunConfig& config, const CommandOptions& options) {
  fs::path dir = output_directory(config, options);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

RunConfig load_checked(const fs::path& config_path, const CommandOptions& options) {
  RunConfig config = load_config(config_path);
  apply_overrides(config, options);
  check_config(config);
  return config;
}

void print_issues(const ValidationReport& report, std::ostream& err) {
  for (const auto& issue : report.issues) err << "error: " << issue.message << "\n";
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GuardError& e) {
    err << "simulation aborted at slot " << e.slot() << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const ConvergenceError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

ExponentReport analyze_checked(const RunConfig& config, std::ostream& err) {
  auto v = validate(config.network);
  if (!v.ok()) {
    print_issues(v, err);
    throw ConfigError("network failed validation");
  }
  return analyze(config.network, config.analysis.knapsack());
}

std::optional<JointExponent> joint_of(const RunConfig& config, const ExponentReport& report, std::ostream& err) {
  if (config.analysis.joint_nodes.empty()) return std::nullopt;
  try {
    return JointExponent{config.analysis.joint_nodes, joint_exponent(report, config.analysis.joint_nodes)};
  } catch (const CapExhaustedError& e) {
    err << "warning: joint exponent unavailable: " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

int cmd_validate(const fs::path& config_path, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_checked(config_path, options);
    const auto report = validate(config.network);
    out << std::left << std::setw(6) << "node" << std::setw(14) << "capacity" << std::setw(14) << "load"
        << "status\n";
    for (const auto& row : report.loads) {
      const bool stable = row.load < row.capacity;
      out << std::setw(6) << row.node << std::setw(14) << short_number(row.capacity) << std::setw(14)
          << short_number(row.load) << (stable ? "ok" : "UNSTABLE") << "\n";
    }
    print_issues(report, err);
    out << (report.ok() ? "valid" : "invalid") << "\n";
    return report.ok() ? kExitOk : kExitConfig;
  });
}

int cmd_analyze(const fs::path& config_path, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_checked(config_path, options);
    const ExponentReport report = analyze_checked(config, err);
    const auto joint = joint_of(config, report, err);
    const fs::path dir = prepare_directory(config, options);
    if (wants(config, "json")) write_file(dir / "report.json", report_json(config.network, report, joint));
    if (wants(config, "csv")) write_file(dir / "analysis.csv", report_csv(report));

    for (const auto& e : report.nodes) {
      out << "node " << e.node << ": ";
      if (e.feasible_found) {
        out << "kappa = " << short_number(e.kappa) << ", optima";
        for (const auto& J : e.optima) {
          out << " (";
          for (std::size_t i = 0; i < J.size(); ++i) out << (i ? " " : "") << J[i];
          out << ")";
        }
      } else {
        out << "kappa >= " << short_number(e.kappa_cap) << " (no overloading profile within the cap)";
      }
      out << "\n";
    }
    if (joint) out << "joint kappa = " << short_number(joint->kappa) << "\n";
    return kExitOk;
  });
}

int cmd_simulate(const fs::path& config_path, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_checked(config_path, options);
    require_valid(config.network);
    const auto traces = simulate_replications(config.network, config.simulation);
    const fs::path dir = prepare_directory(config, options);

    for (std::size_t i = 0; i < traces.size(); ++i) {
      const std::string stem = "trace_r" + std::to_string(i);
      if (wants(config, "csv")) {
        std::ofstream f(dir / (stem + ".csv"), std::ios::binary);
        write_trace_csv(f, traces[i]);
      }
      if (wants(config, "json")) write_file(dir / (stem + ".summary.json"), trace_summary_json(traces[i]));
    }
    if (wants(config, "csv") && !traces.empty()) {
      for (std::size_t k = 0; k < traces.front().nodes.size(); ++k) {
        std::vector<double> pooled;
        for (const auto& t : traces) pooled.insert(pooled.end(), t.nodes[k].workload.begin(), t.nodes[k].workload.end());
        std::ofstream f(dir / ("ccdf_node" + std::to_string(traces.front().nodes[k].node) + ".csv"), std::ios::binary);
        write_ccdf_csv(f, ccdf_on_grid(pooled));
      }
    }
    out << "simulated " << traces.size() << " replication(s) of " << config.simulation.horizon << " slots into "
        << dir.string() << "\n";
    return kExitOk;
  });
}

int cmd_verify(const fs::path& config_path, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_checked(config_path, options);
    const ExponentReport report = analyze_checked(config, err);
    const fs::path dir = prepare_directory(config, options);
    if (wants(config, "json")) write_file(dir / "report.json", report_json(config.network, report, joint_of(config, report, err)));

    const auto traces = simulate_replications(config.network, config.simulation);
    const auto rows = judge(report, traces, config.analysis, options.injected_kappa);
    if (wants(config, "json")) write_file(dir / "verdict.json", verdict_json(rows));
    if (wants(config, "csv")) write_file(dir / "verdict.csv", verdict_csv(rows));

    bool failed = false;
    out << std::left << std::setw(6) << "node" << std::setw(12) << "kappa" << std::setw(12) << "ccdf" << std::setw(12)
        << "hill" << std::setw(12) << "rel_err"
        << "verdict\n";
    for (const auto& r : rows) {
      auto fixed = [](double x) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(4) << x;
        return os.str();
      };
      out << std::setw(6) << r.node << std::setw(12) << fixed(r.predicted) << std::setw(12) << fixed(r.ccdf.exponent)
          << std::setw(12) << fixed(r.hill.exponent) << std::setw(12) << fixed(r.verdict.relative_error)
          << to_string(r.verdict.verdict) << "\n";
      failed = failed || r.verdict.verdict == Verdict::kFail;
    }
    return failed ? kExitVerifyFailed : kExitOk;
  });
}

}  // namespace tailnet
