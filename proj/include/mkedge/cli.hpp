#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mkedge::cli {

enum class Format { Csv, Json };

struct ZGrid {
  double lo = -6.0;
  double hi = 6.0;
  double step = 0.025;

  std::vector<double> points() const;
  std::string to_string() const;
};

struct RunConfig {
  std::string command;
  std::string input;
  int order = 1;
  std::vector<int> n_values{64, 256, 1024};
  ZGrid z_grid;
  std::size_t samples = 2'000'000;
  std::uint64_t seed = 1;
  std::vector<int> starts;  // verify only; all states when empty
  std::string output;       // stdout when empty
  Format format = Format::Csv;
};

/// Checks the RunConfig invariants (order in [0, 4], n >= 1, samples >= 1e4
/// for verify, a non-empty increasing z grid). Throws mkedge::Error.
void check_config(const RunConfig& cfg);

std::string version();

/// Each command returns the rendered report. `passed` reports whether every
/// requested check held (only verify can fail one).
std::string cmd_analyze(const RunConfig& cfg);
std::string cmd_expand(const RunConfig& cfg);
std::string cmd_verify(const RunConfig& cfg, bool& passed);
std::string cmd_discretize(const RunConfig& cfg);

/// Exit codes: 0 success, 1 usage, 2 invalid input, 3 numerical failure,
/// 4 verification failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitVerification = 4;

/// Parses argv, runs the command and writes the report; diagnostics and
/// notes go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mkedge::cli
