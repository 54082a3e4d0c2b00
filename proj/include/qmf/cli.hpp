#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "qmf/algebra.hpp"
#include "qmf/serialize.hpp"

namespace qmf {

inline constexpr const char* kSchemaVersion = "qmf/1";

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitSchema = 2,
  kExitTruncation = 3,
  kExitSolver = 4,
};

struct RunOptions {
  /// Overrides the config's "seed" field when set.
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
};

struct RunResult {
  int exit_code = kExitOk;
  json report;
  /// Header plus one row per (series, n); empty when no decay table was produced.
  std::string decay_csv;
  std::string message;
};

/// One pass/fail entry of a report.
struct Check {
  std::string id;
  std::string claim;
  double value = 0.0;
  double tolerance = 0.0;
  /// "le": value <= tolerance passes; "gt": value > tolerance passes.
  std::string relation = "le";

  bool passed() const { return relation == "gt" ? value > tolerance : value <= tolerance; }
};

json to_json(const Check& c);

/// Evaluates a parsed config. Library errors are mapped to exit codes, never thrown.
RunResult run_config(const json& config, const RunOptions& options = {});

/// Reads the config file, runs it and writes report.json (and decay.csv when present)
/// into options.out_dir. Diagnostics go to `err`.
int run_file(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& err);

/// The full invariant suite of the verify mode.
struct VerifyResult {
  std::vector<Check> checks;
  json details;
  std::string decay_csv;
};

VerifyResult verify_suite(std::uint64_t seed, const Tolerance& tol);

}  // namespace qmf
