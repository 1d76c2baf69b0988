#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "weightlab/error.hpp"
#include "weightlab/growth.hpp"
#include "weightlab/measure.hpp"

namespace weightlab::cli {

enum class Command { Zeros, Masses, Ap, Testing, Quadap, Selfsim, Report };

const char* to_string(Command cmd) noexcept;

struct RunConfig {
  Command command = Command::Report;
  double p = 4.0;
  double delta = 1.0;
  int depth_omega = 16;
  int depth_sigma = 16;
  int family_n = 14;
  int max_k = 10;  // zero-table generation written to zeros.csv
  long long nmax = 1000000;
  double tol = 1e-12;
  SigmaVariant variant = SigmaVariant::Zeroed;
  bool dual = false;
  std::string zeros_file;
  std::string out = ".";
  bool svg = false;
  int scan_k = 6;
  int depth_zeros = 32;
  bool timings = false;
};

/// Invalid configuration; `flag()` names the offending option.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string flag, const std::string& what)
      : std::runtime_error(flag + ": " + what), flag_(std::move(flag)) {}
  const std::string& flag() const noexcept { return flag_; }

 private:
  std::string flag_;
};

/// Thrown for --help; carries the usage text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments exclude the program name. Values from --config FILE (JSON) are
/// applied first, explicit flags override them.
RunConfig parse_config(const std::vector<std::string>& args);

void validate(const RunConfig& cfg);

struct StageReport {
  std::string name;
  std::string status;
  double seconds = 0.0;
};

struct RunSummary {
  std::vector<StageReport> stages;
  std::vector<std::string> manifest;
  std::string verdict_line;  // report only
  std::string json;          // contents of summary.json
};

/// Executes the command and writes its files under cfg.out. Throws
/// weightlab::Error on failure; files of completed stages stay on disk.
RunSummary run(const RunConfig& cfg);

/// Standalone SVG with log-log axes, the data polyline and a dashed
/// reference line of slope `target_slope` through the first point.
std::string svg_loglog(const std::vector<GrowthPoint>& series,
                       double target_slope);
void emit_svg_loglog(const std::vector<GrowthPoint>& series,
                     double target_slope, const std::string& path);

/// 2 for configuration-type errors, 3 for numerical failures.
int exit_code(ErrorKind kind) noexcept;
/// Writes `_FAILED` into `dir` with the message.
void write_failure_marker(const std::string& dir, const std::string& what);

/// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
int main(int argc, const char* const* argv);

}  // namespace weightlab::cli
