#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace demux::cli {

enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kConfigError = 2,
  kIoError = 3,
  kCompatibilityError = 4,
  kNumericalError = 5,
};

/// Environment variable naming the default directory for reports.
inline constexpr const char* kOutputDirEnv = "DEMUX_OUTPUT_DIR";

struct PredictOptions {
  std::filesystem::path config;
  std::optional<int> n_max;
  std::string scheme = "both";
  bool include_detectors = false;
  std::optional<std::filesystem::path> out;
};

struct SimulateOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> pulses;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> shards;
  std::optional<std::filesystem::path> csv;
};

struct AnalyzeOptions {
  std::filesystem::path config;
  std::filesystem::path stream;
  std::string which = "all";  // histograms, nfold, ratios, eta-dm or all
  std::optional<std::filesystem::path> out_dir;
};

struct FitSaturationOptions {
  std::filesystem::path data;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> out_dir;
};

// Each command reports on `out`, diagnostics on `err`, and returns an exit
// code. No exception escapes.
int cmd_predict(const PredictOptions& options, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& options, std::ostream& out, std::ostream& err);
int cmd_fit_saturation(const FitSaturationOptions& options, std::ostream& out,
                       std::ostream& err);

/// --out-dir, else $DEMUX_OUTPUT_DIR, else the working directory.
[[nodiscard]] std::filesystem::path output_dir(
    const std::optional<std::filesystem::path>& requested);

}  // namespace demux::cli
