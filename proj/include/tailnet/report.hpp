#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tailnet/knapsack.hpp"
#include "tailnet/model.hpp"
#include "tailnet/simulator.hpp"
#include "tailnet/tailstats.hpp"

namespace tailnet {

/// First line of every CSV file the tool writes.
inline constexpr const char* kCsvVersionLine = "# tailnet-csv v1";

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

struct JointExponent {
  std::vector<NodeId> nodes;
  double kappa = 0.0;
};

std::string report_json(const NetworkSpec& spec, const ExponentReport& report,
                        const std::optional<JointExponent>& joint = std::nullopt);

/// Reads back the per-node entries of report_json (scaled solutions included).
ExponentReport parse_report_json(const std::string& text);

std::string report_csv(const ExponentReport& report);

/// `slot,node,workload` rows, slot-major.
void write_trace_csv(std::ostream& out, const SimTrace& trace);

/// node -> (slot, workload) samples. Throws ConfigError on malformed input.
std::map<NodeId, std::vector<std::pair<long long, double>>> read_trace_csv(std::istream& in);

std::string trace_summary_json(const SimTrace& trace);

/// P{W > z} of the samples on a log-spaced grid between the smallest and
/// largest positive sample (empty if there are none).
std::vector<CcdfPoint> ccdf_on_grid(std::span<const double> samples, std::size_t points = 100);

void write_ccdf_csv(std::ostream& out, const std::vector<CcdfPoint>& ccdf);

struct VerdictRow {
  NodeId node = 0;
  double predicted = 0.0;  // infinity when no profile was found within the cap
  TailEstimate ccdf;
  TailEstimate hill;
  ComparisonVerdict verdict;  // judged on the regression estimate
};

std::string verdict_json(const std::vector<VerdictRow>& rows);
std::string verdict_csv(const std::vector<VerdictRow>& rows);

}  // namespace tailnet
