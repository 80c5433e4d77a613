#include "tailnet/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tailnet/error.hpp"

namespace tailnet {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_or(const json& j, double fallback) { return j.is_number() ? j.get<double>() : fallback; }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  return m;
}

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string profile_text(const LongSessionProfile& J) {
  std::string s = "(";
  for (std::size_t i = 0; i < J.size(); ++i) s += (i ? " " : "") + std::to_string(J[i]);
  return s + ")";
}

json estimate_json(const TailEstimate& e) {
  return {{"method", to_string(e.method)},
          {"exponent", finite_or_null(e.exponent)},
          {"stderr", finite_or_null(e.stderr_)},
          {"window", {e.window.first, e.window.second}},
          {"n_samples", e.n_samples},
          {"n_positive", e.n_positive},
          {"n_exceedances", e.n_exceedances},
          {"zero_fraction", e.zero_fraction},
          {"low_confidence", e.low_confidence},
          {"non_power_law", e.non_power_law},
          {"note", e.note}};
}

}  // namespace

std::string report_json(const NetworkSpec& spec, const ExponentReport& report,
                        const std::optional<JointExponent>& joint) {
  json nodes = json::array();
  for (const auto& e : report.nodes) {
    json solutions = json::array();
    for (std::size_t i = 0; i < e.solutions.size(); ++i) {
      const auto& s = e.solutions[i];
      solutions.push_back({{"profile", e.optima[i]},
                           {"rate", matrix_json(s.rate)},
                           {"load", matrix_json(s.load)},
                           {"scale", vector_json(s.scale)},
                           {"node_input", vector_json(s.node_input)},
                           {"iterations", s.iterations},
                           {"residual", s.residual},
                           {"feedforward", s.feedforward},
                           {"boundary_nodes", s.boundary_nodes}});
    }
    json entry = {{"node", e.node},
                  {"feasible_found", e.feasible_found},
                  {"kappa", finite_or_null(e.kappa)},
                  {"kappa_cap", e.kappa_cap},
                  {"profiles_examined", e.profiles_examined},
                  {"optima", e.optima},
                  {"scaled_solutions", solutions}};
    if (e.feasible_found) {
      entry["slack"] = e.slack;
    } else {
      entry["slack"] = nullptr;
      entry["kappa_lower_bound"] = e.kappa_cap;
    }
    nodes.push_back(entry);
  }
  json loads = json::array();
  for (NodeId m = 0; m < spec.num_nodes(); ++m)
    loads.push_back({{"node", m}, {"capacity", spec.capacity(m)}, {"load", node_load(spec, m)}});

  json root = {{"format", "tailnet-report v1"}, {"nodes", nodes}, {"node_loads", loads}};
  if (joint) root["joint"] = {{"nodes", joint->nodes}, {"kappa", joint->kappa}};
  return root.dump(2) + "\n";
}

ExponentReport parse_report_json(const std::string& text) {
  ExponentReport report;
  try {
    const json root = json::parse(text);
    for (const auto& n : root.at("nodes")) {
      NodeExponent e;
      e.node = n.at("node").get<NodeId>();
      e.feasible_found = n.at("feasible_found").get<bool>();
      e.kappa = number_or(n.at("kappa"), std::numeric_limits<double>::infinity());
      e.kappa_cap = n.at("kappa_cap").get<double>();
      e.slack = number_or(n.at("slack"), 0.0);
      e.profiles_examined = n.at("profiles_examined").get<std::size_t>();
      e.optima = n.at("optima").get<std::vector<LongSessionProfile>>();
      for (const auto& s : n.at("scaled_solutions")) {
        ScaledSolution sol;
        sol.rate = matrix_from(s.at("rate"));
        sol.load = matrix_from(s.at("load"));
        sol.scale = vector_from(s.at("scale"));
        sol.node_input = vector_from(s.at("node_input"));
        sol.iterations = s.at("iterations").get<long>();
        sol.residual = s.at("residual").get<double>();
        sol.feedforward = s.at("feedforward").get<bool>();
        sol.boundary_nodes = s.at("boundary_nodes").get<std::vector<NodeId>>();
        e.solutions.push_back(std::move(sol));
      }
      report.nodes.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  return report;
}

std::string report_csv(const ExponentReport& report) {
  std::ostringstream os;
  os << kCsvVersionLine << "\n";
  os << "node,feasible,kappa,kappa_cap,slack,profiles_examined,optima\n";
  for (const auto& e : report.nodes) {
    std::string optima;
    for (std::size_t i = 0; i < e.optima.size(); ++i) optima += (i ? "|" : "") + profile_text(e.optima[i]);
    os << e.node << "," << (e.feasible_found ? "true" : "false") << ","
       << (e.feasible_found ? format_double(e.kappa) : ">=" + format_double(e.kappa_cap)) << ","
       << format_double(e.kappa_cap) << "," << (e.feasible_found ? format_double(e.slack) : "") << ","
       << e.profiles_examined << "," << optima << "\n";
  }
  return os.str();
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << kCsvVersionLine << "\n";
  out << "slot,node,workload\n";
  const std::size_t samples = trace.nodes.empty() ? 0 : trace.nodes.front().workload.size();
  for (std::size_t i = 0; i < samples; ++i) {
    const long long slot = trace.slot_of(i);
    for (const auto& nt : trace.nodes) out << slot << "," << nt.node << "," << format_double(nt.workload[i]) << "\n";
  }
}

std::map<NodeId, std::vector<std::pair<long long, double>>> read_trace_csv(std::istream& in) {
  std::map<NodeId, std::vector<std::pair<long long, double>>> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "slot,node,workload") throw ConfigError("trace csv line " + std::to_string(lineno) + ": bad header");
      header = true;
      continue;
    }
    const auto a = line.find(',');
    const auto b = line.find(',', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw ConfigError("trace csv line " + std::to_string(lineno) + ": expected 3 columns");
    try {
      const long long slot = std::stoll(line.substr(0, a));
      const auto node = static_cast<NodeId>(std::stoull(line.substr(a + 1, b - a - 1)));
      const double w = std::stod(line.substr(b + 1));
      out[node].emplace_back(slot, w);
    } catch (const std::exception&) {
      throw ConfigError("trace csv line " + std::to_string(lineno) + ": unparsable value");
    }
  }
  if (!header) throw ConfigError("trace csv: missing header");
  return out;
}

std::string trace_summary_json(const SimTrace& trace) {
  json nodes = json::array();
  for (const auto& nt : trace.nodes) {
    nodes.push_back({{"node", nt.node},
                     {"samples", nt.workload.size()},
                     {"max_workload", nt.max_workload},
                     {"busy_fraction", nt.busy_fraction},
                     {"mean_workload", nt.mean_workload},
                     {"mean_throughput", nt.mean_throughput}});
  }
  const auto& c = trace.config;
  json root = {{"format", "tailnet-trace-summary v1"},
               {"config",
                {{"seed", c.seed},
                 {"horizon", c.horizon},
                 {"warmup", c.warmup},
                 {"stride", c.stride},
                 {"weight_mode", to_string(c.weight_mode)},
                 {"monitored_nodes", c.monitored}}},
               {"first_slot", trace.first_slot},
               {"mean_active_sessions", trace.mean_active_sessions},
               {"nodes", nodes}};
  return root.dump(2) + "\n";
}

std::vector<CcdfPoint> ccdf_on_grid(std::span<const double> samples, std::size_t points) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto first_positive = std::upper_bound(sorted.begin(), sorted.end(), 0.0);
  if (first_positive == sorted.end() || points < 2) return {};
  const double lo = std::log(*first_positive);
  const double hi = std::log(sorted.back());
  const double n = static_cast<double>(sorted.size());
  std::vector<CcdfPoint> out;
  for (std::size_t i = 0; i < points; ++i) {
    const double z = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), z);
    out.push_back({z, static_cast<double>(above) / n});
    if (hi == lo) break;
  }
  return out;
}

void write_ccdf_csv(std::ostream& out, const std::vector<CcdfPoint>& ccdf) {
  out << kCsvVersionLine << "\n";
  out << "z,ccdf\n";
  for (const auto& p : ccdf) out << format_double(p.z) << "," << format_double(p.survival) << "\n";
}

std::string verdict_json(const std::vector<VerdictRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"node", r.node},
                   {"predicted_kappa", finite_or_null(r.predicted)},
                   {"ccdf_regression", estimate_json(r.ccdf)},
                   {"hill", estimate_json(r.hill)},
                   {"relative_error", finite_or_null(r.verdict.relative_error)},
                   {"tolerance", r.verdict.tolerance},
                   {"verdict", to_string(r.verdict.verdict)}});
  }
  return json{{"format", "tailnet-verdict v1"}, {"nodes", out}}.dump(2) + "\n";
}

std::string verdict_csv(const std::vector<VerdictRow>& rows) {
  std::ostringstream os;
  os << kCsvVersionLine << "\n";
  os << "node,predicted_kappa,kappa_ccdf,kappa_hill,relative_error,verdict\n";
  for (const auto& r : rows) {
    os << r.node << "," << format_double(r.predicted) << "," << format_double(r.ccdf.exponent) << ","
       << format_double(r.hill.exponent) << "," << format_double(r.verdict.relative_error) << ","
       << to_string(r.verdict.verdict) << "\n";
  }
  return os.str();
}

}  // namespace tailnet
