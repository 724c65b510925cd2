#pragma once

// Experiment configuration, drivers for each subcommand and report emission.
//
// A configuration is a JSON object:
//
//   {
//     "schema": 1,
//     "command": "evi-check" | "tataru" | "laplace-converge" | "ham-chain" |
//                "resolvent" | "comparison" | "all",
//     "seed": 1,
//     "output_dir": "out",
//     "space": {"kind": "euclidean", "dimension": 1, "potential": "quadratic",
//               "kappa": 1.0, "box": [-5, 5], "N": 64},
//     "evi": {...}, "tataru": {...}, "laplace": {...}, "ham_chain": {...},
//     "resolvent": {...}, "comparison": {...}
//   }
//
// Module blocks are optional; missing fields take documented defaults. Any
// present field is validated and errors name its dotted path.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hjflow/space.hpp"

namespace hjflow {

inline constexpr int kConfigSchema = 1;
inline constexpr const char* kVersion = "1.0.0";

struct SpaceSpec {
  SpaceKind kind = SpaceKind::Euclidean;
  std::size_t dimension = 1;
  std::size_t quantiles = 64;
  PotentialKind potential = PotentialKind::Quadratic;
  double kappa = 1.0;
  Box box{};

  ModelSpace build() const;
};

// A point given either as a number (constant point) or a coordinate array.
using PointSpec = std::vector<double>;

struct EviParams {
  std::size_t instances = 200;
  double delta = 1e-4;
  std::optional<Box> sample_box;  // default depends on the potential
  std::size_t time_samples = 64;
  double tolerance = 1e-3;
};

struct TataruParams {
  PointSpec pi{0.0};
  PointSpec mu{3.0};
  double epsilon = 0.0;  // 0: plain metric
  std::optional<double> kappa;
  bool grid = false;             // dump the objective on the search grid
  std::size_t instances = 100;   // randomized invariant suite
  Box sample_box{-2.0, 2.0};
};

struct LaplaceParams {
  double epsilon = 1e-2;
  PointSpec pi{0.0};
  PointSpec mu{3.0};
  std::vector<int> m{10, 100, 1000};
  std::vector<int> n{10, 40, 160};
  int riemann_m = 20;  // m used for the discrete refinement rows
  double tolerance = 0.05;  // on the error at the largest m
};

struct HamChainParams {
  std::size_t samples = 500;
  std::vector<std::string> links{"1-2", "4-5", "5-6", "0-1"};
  Box sample_box{-1.5, 1.5};
};

struct HSpec {
  std::string type = "linear";  // linear | constant | sine
  double value = 0.0;           // constant
  double amplitude = 1.0;       // sine
  double frequency = 1.0;       // sine
  double slope = 1.0;           // linear, clipped to the box
};

struct GridParams {
  double half_width = 5.0;
  double dx = 1.0 / 200.0;
  double dt = 0.0;  // 0: lambda / 50
  std::size_t controls = 129;
  double control_bound = 2.0;
  double tol = 1e-10;
};

struct ResolventParams {
  double lambda = 1.0;
  HSpec h{};
  GridParams grid{};
  std::size_t pairs = 50;  // random test pairs per side
  double slack_dx_multiple = 5.0;
};

struct ComparisonParams {
  double lambda = 1.0;
  std::size_t pairs = 20;
  double shift = 0.3;
  GridParams grid{};
};

struct ExperimentConfig {
  int schema = kConfigSchema;
  std::string command = "all";
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  SpaceSpec space{};
  EviParams evi{};
  TataruParams tataru{};
  LaplaceParams laplace{};
  HamChainParams ham_chain{};
  ResolventParams resolvent{};
  ComparisonParams comparison{};
  nlohmann::json source;  // the validated input, echoed in reports
};

const std::vector<std::string>& experiment_commands();

// Throws ConfigError with the dotted field path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);

struct ReportRow {
  std::string check;
  std::size_t instance = 0;
  double value = 0.0;
  double bound = 0.0;
  double violation = 0.0;
  bool pass = true;
};

// Auxiliary numeric table written next to the report (e.g. x,u).
struct DataTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct CheckSummary {
  std::string check;
  std::size_t rows = 0;
  std::size_t failed = 0;
  double max_violation = 0.0;
};

struct Report {
  std::string command;
  nlohmann::json config;
  std::vector<ReportRow> rows;
  std::vector<DataTable> tables;
  std::vector<std::string> notes;

  void add(std::string check, std::size_t instance, double value, double bound,
           double violation, bool pass);
  std::vector<CheckSummary> summary() const;  // in first-appearance order
  std::size_t failed() const;
  bool all_pass() const { return failed() == 0; }
  nlohmann::json to_json() const;
};

Report run_experiment(const ExperimentConfig& config);

// Formats a double with 17 significant digits ('.' separator).
std::string format_number(double x);

std::string report_csv(const Report& report);
std::string table_csv(const DataTable& table);

enum class ReportFormat { Csv, Json };
ReportFormat report_format_from_string(const std::string& s);

// Writes <dir>/<command>.csv (or .json) and every data table as
// <dir>/<table>.csv. Returns the written paths. Throws IoError naming the path on
// I/O failure.
std::vector<std::string> emit_report(const Report& report, const std::string& dir,
                                     ReportFormat format);

}  // namespace hjflow
