#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace demux::cli;
  CLI::App app{"Temporal-to-spatial photon demultiplexer: predictions, simulation, analysis"};
  app.set_version_flag("--version", "demux 0.1.0");
  app.require_subcommand(1);

  PredictOptions predict;
  int n_max = 0;
  auto* p = app.add_subcommand("predict", "n-fold rate table, active vs probabilistic");
  p->add_option("-c,--config", predict.config, "run configuration (JSON)")->required();
  p->add_option("-n,--n-max", n_max, "largest photon number")->check(CLI::PositiveNumber);
  p->add_option("--scheme", predict.scheme, "active, probabilistic or both")
      ->check(CLI::IsMember({"active", "probabilistic", "both"}));
  p->add_flag("--include-detectors", predict.include_detectors, "apply detector efficiency");
  p->add_option("-o,--out", predict.out, "CSV output (default stdout)");

  SimulateOptions simulate;
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;
  std::size_t shards = 1;
  auto* s = app.add_subcommand("simulate", "Monte Carlo time-tag stream");
  s->add_option("-c,--config", simulate.config, "run configuration (JSON)")->required();
  s->add_option("-o,--out", simulate.out, "binary stream file")->required();
  auto* pulses_opt = s->add_option("--pulses", pulses, "pump pulses (overrides config)");
  auto* seed_opt = s->add_option("--seed", seed, "RNG seed (overrides config)");
  auto* shards_opt = s->add_option("--shards", shards, "parallel shards")->check(CLI::PositiveNumber);
  s->add_option("--csv", simulate.csv, "also write records as CSV");

  AnalyzeOptions analyze;
  auto* a = app.add_subcommand("analyze", "histograms, n-fold rates and estimators");
  a->add_option("-c,--config", analyze.config, "run configuration (JSON)")->required();
  a->add_option("-s,--stream", analyze.stream, "binary stream file")->required();
  a->add_option("-w,--which", analyze.which, "histograms, nfold, ratios, eta-dm or all")
      ->check(CLI::IsMember({"histograms", "nfold", "ratios", "eta-dm", "all"}));
  a->add_option("-d,--out-dir", analyze.out_dir, "report directory (default $DEMUX_OUTPUT_DIR)");

  FitSaturationOptions fit;
  auto* f = app.add_subcommand("fit-saturation", "fit c_max and P0 to rate vs pump power");
  f->add_option("--data", fit.data, "CSV power_uw,rate_hz,sigma_hz")->required();
  f->add_option("-o,--out", fit.out, "fit-curve CSV");
  f->add_option("-d,--out-dir", fit.out_dir, "directory for the default fit-curve CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (*p) {
    if (n_max > 0) predict.n_max = n_max;
    return cmd_predict(predict, std::cout, std::cerr);
  }
  if (*s) {
    if (*pulses_opt) simulate.pulses = pulses;
    if (*seed_opt) simulate.seed = seed;
    if (*shards_opt) simulate.shards = shards;
    return cmd_simulate(simulate, std::cout, std::cerr);
  }
  if (*a) return cmd_analyze(analyze, std::cout, std::cerr);
  return cmd_fit_saturation(fit, std::cout, std::cerr);
}
