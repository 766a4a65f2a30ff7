#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "supind/core.hpp"

namespace supind::cli {

/// Exit statuses of the command-line tool.
enum ExitCode { kOk = 0, kInvalidInput = 1, kEmptyResult = 2, kFailure = 3 };

/// Error carrying the exit status it maps to.
class CliError : public std::runtime_error {
 public:
  CliError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

/**
 * Everything a run needs. `grid` = 0 and `x_max` = 0 pick the per-command
 * defaults; the resolved config written next to the outputs has them filled in.
 */
struct RunConfig {
  std::string command;
  double lambda = -30.0;
  double p = 3.0;
  double b = 1.0;
  double c_left = 1.0;
  double c_right = 1.0;
  double alpha = 0.1;
  double alpha_min = 0.002;
  double alpha_max = 0.498;
  int alpha_steps = 200;
  std::string format = "csv";
  std::string out = "out";
  double tol_quad = 1e-10;
  double tol_root = 1e-14;
  int grid = 0;  ///< profile points (solve), rows (timemaps), polyline points (phase), check grid (diagram)
  int scan_points = 400;
  double x_max = 0.0;
  std::vector<double> energies;
  std::optional<double> alpha_star;
  bool validate = true;

  ProblemParams params() const;
};

/// Parses argv; flags override values from --config. Throws CliError.
RunConfig parse_args(int argc, const char* const* argv);

/// Fills in per-command defaults and checks the values. Throws CliError(kInvalidInput).
RunConfig resolve(RunConfig cfg);

std::string to_json(const RunConfig& cfg);
/// Overlays the keys present in a JSON document onto `base`.
RunConfig overlay_json(const std::string& text, RunConfig base);

/// Runs a resolved config and writes its files under cfg.out. Returns the exit status.
int run(const RunConfig& cfg, std::ostream& log);

/// parse_args + resolve + run with every error mapped to its exit status.
int main_entry(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

/// 15 significant digits; empty for NaN.
std::string format_number(double v);
/// Fixed notation with 12 decimals (profile tables).
std::string format_fixed(double v);

}  // namespace supind::cli
