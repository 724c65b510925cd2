// Command-line front end; talks to the library only through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "hjflow/hjflow.h"

namespace {

// Exit codes: 0 all checks pass, 1 some check failed, 2 bad configuration or
// usage, 3 runtime failure.
int status_exit(hjf_status s) { return s == HJF_ERR_CONFIG || s == HJF_ERR_ARGUMENT ? 2 : 3; }

int run(const std::string& command, const std::string& config_path, bool has_seed,
        std::uint64_t seed, const std::string& out_dir, const std::string& format) {
  std::string text = R"({"schema": 1})";
  if (!config_path.empty()) {
    std::ifstream f(config_path, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot read config " << config_path << "\n";
      return 2;
    }
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }

  hjf_report* report = nullptr;
  hjf_status s = hjf_run_experiment(text.c_str(), command.c_str(), has_seed, seed, &report);
  if (s != HJF_OK) {
    std::cerr << "error: " << hjf_last_error() << "\n";
    if (*hjf_last_error_field()) std::cerr << "field: " << hjf_last_error_field() << "\n";
    return status_exit(s);
  }
  const std::string dir = out_dir.empty() ? hjf_report_output_dir(report) : out_dir;
  s = hjf_report_write(report, dir.c_str(), format.c_str());
  if (s != HJF_OK) {
    std::cerr << "error: " << hjf_last_error() << "\n";
    hjf_report_free(report);
    return status_exit(s);
  }
  std::cout << hjf_report_summary(report);
  const bool pass = hjf_report_passed(report) != 0;
  std::cout << (pass ? "PASS" : "FAIL") << " " << command << ": "
            << hjf_report_row_count(report) - hjf_report_failed_count(report) << "/"
            << hjf_report_row_count(report) << " rows pass; output in " << dir << "\n";
  hjf_report_free(report);
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for Hamilton-Jacobi equations on gradient-flow spaces"};
  app.set_version_flag("--version", std::string(hjf_version()));
  app.require_subcommand(1);

  std::string config_path, out_dir, format = "csv";
  std::uint64_t seed = 0;
  int exit_code = 0;

  const char* commands[][2] = {
      {"evi-check", "EVI residual, contraction, energy, slope and distance checks"},
      {"tataru", "Tataru distance, minimizers and invariant suite"},
      {"laplace-converge", "Laplace/Varadhan convergence and Riemann refinement"},
      {"ham-chain", "inequalities along the Hamiltonian approximation chain"},
      {"resolvent", "control-problem resolvent and viscosity verdicts"},
      {"comparison", "comparison principle on random data pairs"},
      {"all", "every suite"}};
  for (auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "random seed, overrides the config");
    sub->add_option("--out", out_dir, "output directory, overrides the config");
    sub->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->callback([&, name = std::string(c[0]), sub] {
      exit_code = run(name, config_path, sub->count("--seed") > 0, seed, out_dir, format);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return exit_code;
}
