#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "demux/rates.hpp"
#include "demux/simulator.hpp"

namespace demux::cli {

inline constexpr int kConfigVersion = 1;

struct AnalysisSettings {
  std::optional<double> eta_dm;
  bool include_detectors = false;
  int n_max = 8;
  int max_delay_bins = 16;
  std::optional<double> nfold_window_ns;
};

/// Parsed run configuration. Sections `emitter`, `network`, `couplers`,
/// `losses` and `detectors` are required; `schedule`, `simulation` and
/// `analysis` fall back to defaults.
struct RunConfig {
  SimConfig sim;
  std::size_t shards = 1;
  AnalysisSettings analysis;

  /// eta_dm from the analysis section, else the switching efficiency of the
  /// configured couplers.
  [[nodiscard]] double prediction_eta_dm() const;
  [[nodiscard]] PredictionSetup prediction_setup() const;
};

/// Throws ConfigError on schema violations and IoError when unreadable.
[[nodiscard]] RunConfig parse_run_config(const std::string& json_text);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace demux::cli
