#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "demux/errors.hpp"
#include "demux/fitting.hpp"
#include "demux/histogram.hpp"
#include "demux/nfold.hpp"
#include "demux/report.hpp"
#include "demux/splitting.hpp"
#include "demux/stream_io.hpp"
#include "run_config.hpp"

namespace demux::cli {
namespace fs = std::filesystem;
namespace {

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "invalid data: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const CompatibilityError& e) {
    err << "incompatible input: " << e.what() << '\n';
    return kCompatibilityError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const EstimationError& e) {
    err << "estimation failed: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUnexpected;
  }
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write '" + path.string() + "'");
  return file;
}

void close_output(std::ofstream& file, const fs::path& path) {
  file.close();
  if (!file) throw IoError("failed writing '" + path.string() + "'");
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  auto file = open_output(path);
  writer(file);
  close_output(file, path);
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  write_file(path, [&](std::ostream& o) { o << std::setw(2) << doc << '\n'; });
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

std::vector<CoincidenceHistogram> all_histograms(const TimeTagStream& stream, int reach) {
  std::vector<CoincidenceHistogram> out;
  const auto channels = stream.metadata.channel_count;
  for (std::uint32_t a = 1; a <= channels; ++a) {
    for (std::uint32_t b = a + 1; b <= channels; ++b) out.push_back(histogram(stream, a, b, reach));
  }
  return out;
}

std::vector<NFoldCounts> nfold_series(const TimeTagStream& stream, const RunConfig& cfg) {
  const auto& schedule = cfg.sim.schedule;
  const double pulse_s = static_cast<double>(stream.metadata.pulse_period_ps) * 1e-12;
  const double window_s = cfg.analysis.nfold_window_ns
      ? *cfg.analysis.nfold_window_ns * 1e-9
      : static_cast<double>(schedule.period()) * pulse_s;
  std::vector<NFoldCounts> rows;
  std::vector<std::uint32_t> channels{1};
  for (std::uint32_t c = 2; c <= stream.metadata.channel_count; ++c) {
    channels.push_back(c);
    rows.push_back(count_nfold(stream, channels, window_s, schedule));
  }
  return rows;
}

}  // namespace

fs::path output_dir(const std::optional<fs::path>& requested) {
  if (requested) return *requested;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return fs::path(".");
}

int cmd_predict(const PredictOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.scheme != "active" && options.scheme != "probabilistic" &&
        options.scheme != "both") {
      throw ConfigError("--scheme must be active, probabilistic or both");
    }
    RunConfig cfg = load_run_config(options.config);
    if (options.include_detectors) cfg.analysis.include_detectors = true;
    const int n_max = options.n_max.value_or(cfg.analysis.n_max);
    if (n_max < 1) throw ConfigError("--n-max must be >= 1");

    const PredictionSetup setup = cfg.prediction_setup();
    std::vector<RatePrediction> rows;
    for (const auto& row : predict_rates(setup, n_max)) {
      if (options.scheme == "both" || options.scheme == to_string(row.scheme)) rows.push_back(row);
    }

    std::ostringstream summary;
    summary << "eta_dm=" << setup.eta_dm << " T=" << compose_transmission(setup.budget)
            << " eta_sd=" << active_scheme(setup).eta_sd << " crossover_n=";
    if (n_max >= 2) {
      const auto n = crossover_n(active_scheme(setup), probabilistic_scheme(setup), n_max);
      summary << (n ? std::to_string(*n) : "none");
    } else {
      summary << "none";
    }

    if (options.out) {
      write_file(*options.out, [&](std::ostream& o) { write_predictions_csv(o, rows); });
      out << summary.str() << '\n';
    } else {
      write_predictions_csv(out, rows);
      err << summary.str() << '\n';
    }
    return kOk;
  });
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load_run_config(options.config);
    if (options.pulses) {
      cfg.sim.pulse_count = *options.pulses;
      cfg.sim.duration_s.reset();
    }
    if (options.seed) cfg.sim.rng_seed = *options.seed;
    const std::size_t shards = options.shards.value_or(cfg.shards);
    if (shards == 0) throw ConfigError("--shards must be >= 1");

    const TimeTagStream stream =
        shards == 1 ? simulate(cfg.sim) : shard_and_merge(cfg.sim, shards);
    write_stream(stream, options.out);
    if (options.csv) {
      write_file(*options.csv, [&](std::ostream& o) { write_records_csv(stream.records, o); });
    }

    const auto emission = emission_model(cfg.sim.emitter, cfg.sim.pump_power_uw);
    const double eta_sd = emission.mean_photons() * compose_transmission(cfg.sim.budget);
    const double expected = eta_sd * cfg.sim.eta_det * cfg.sim.emitter.pump_rate_hz;
    out << "pulses=" << stream.metadata.pulse_count << " records=" << stream.records.size()
        << " digest=" << stream.metadata.config_digest << '\n';
    if (stream.metadata.pulse_count == 0) return kOk;
    const auto singles = singles_rates(stream);
    double total = 0.0;
    for (std::size_t c = 0; c < singles.size(); ++c) {
      out << "singles_hz[" << c + 1 << "]=" << singles[c] << '\n';
      total += singles[c];
    }
    out << "singles_total_hz=" << total << " expected_hz=" << expected << " (eta_sd=" << eta_sd
        << ")\n";
    return kOk;
  });
}

int cmd_analyze(const AnalyzeOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto& which = options.which;
    if (which != "histograms" && which != "nfold" && which != "ratios" && which != "eta-dm" &&
        which != "all") {
      throw ConfigError("--which must be histograms, nfold, ratios, eta-dm or all");
    }
    const RunConfig cfg = load_run_config(options.config);
    const TimeTagStream stream = read_stream(options.stream);
    const std::string digest = cfg.sim.digest();
    if (stream.metadata.config_digest != digest) {
      throw CompatibilityError("stream was simulated from a different configuration (stream " +
                               stream.metadata.config_digest + ", config " + digest + ")");
    }
    const fs::path dir = output_dir(options.out_dir);
    const bool all = which == "all";
    const auto period = cfg.sim.schedule.period();
    std::vector<CoincidenceHistogram> hists;
    if (all || which == "histograms" || which == "ratios") {
      hists = all_histograms(stream, cfg.analysis.max_delay_bins);
    }

    if (all || which == "histograms") {
      for (const auto& h : hists) {
        write_file(dir / ("histogram_" + std::to_string(h.a) + "_" + std::to_string(h.b) + ".csv"),
                   [&](std::ostream& o) { write_histogram_csv(o, h); });
      }
      nlohmann::json g2 = {{"pairs", hists.size()}, {"schedule_period", period}};
      try {
        const auto r = zero_delay_ratio(hists, period);
        g2["ratio"] = r.ratio;
        g2["sigma"] = r.sigma;
        g2["zero_delay_counts"] = r.zero_delay_counts;
        g2["mean_cycle_peak"] = r.mean_cycle_peak;
        out << "g2_zero=" << r.ratio << " +/- " << r.sigma << '\n';
      } catch (const Error& e) {
        g2["ratio"] = nullptr;
        g2["note"] = e.what();
        out << "g2_zero undefined: " << e.what() << '\n';
      }
      write_json(dir / "g2.json", g2);
      out << "wrote " << hists.size() << " histograms to " << dir.string() << '\n';
    }

    std::vector<NFoldCounts> nfold;
    if (all || which == "nfold" || which == "eta-dm") nfold = nfold_series(stream, cfg);
    if (all || which == "nfold") {
      write_file(dir / "nfold.csv", [&](std::ostream& o) { write_nfold_csv(o, nfold); });
      for (const auto& r : nfold) {
        out << r.n << "-fold rate_hz=" << r.rate_hz << " +/- " << r.rate_sigma_hz << '\n';
      }
    }

    if (all || which == "ratios") {
      const auto est = estimate_splitting_ratios(hists, cfg.sim.network, cfg.sim.schedule);
      const auto eta = switching_efficiency_estimate(cfg.sim.network, cfg.sim.schedule, est);
      write_file(dir / "splitting_ratios.csv", [&](std::ostream& o) { write_splitting_csv(o, est); });
      write_json(dir / "ratios.json", {{"eta_dm", eta.value},
                                       {"eta_dm_sigma", eta.sigma},
                                       {"chi_squared", est.chi_squared},
                                       {"degrees_of_freedom", est.degrees_of_freedom}});
      for (std::size_t i = 0; i < est.parameters.size(); ++i) {
        out << est.parameters[i].first << '/' << est.parameters[i].second << " ratio="
            << est.ratios[i].value << " +/- " << est.ratios[i].sigma << '\n';
      }
      out << "eta_dm_from_ratios=" << eta.value << " +/- " << eta.sigma << '\n';
    }

    if (all || which == "eta-dm") {
      const auto singles = singles_rates(stream);
      const double eta_sd =
          eta_sd_from_singles(singles, stream.metadata.pump_rate_hz, cfg.sim.eta_det);
      const auto fit = fit_switching_efficiency(nfold, stream.metadata.pump_rate_hz,
                                                cfg.sim.eta_det, eta_sd);
      const double sigma = fit.sigmas.empty() ? std::numeric_limits<double>::quiet_NaN()
                                              : fit.sigmas[0];
      write_json(dir / "eta_dm.json", {{"eta_dm", fit.values[0]},
                                       {"eta_dm_sigma", number_or_null(sigma)},
                                       {"eta_sd", eta_sd},
                                       {"chi_squared", fit.chi_squared},
                                       {"degrees_of_freedom", fit.degrees_of_freedom},
                                       {"converged", fit.converged},
                                       {"at_boundary", fit.at_boundary},
                                       {"diagnostics", fit.diagnostics}});
      out << "eta_dm_fit=" << fit.values[0] << " +/- " << sigma << " (eta_sd=" << eta_sd << ")";
      if (!fit.diagnostics.empty()) out << " [" << fit.diagnostics << "]";
      out << '\n';
    }
    return kOk;
  });
}

int cmd_fit_saturation(const FitSaturationOptions& options, std::ostream& out,
                       std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream in(options.data);
    if (!in) throw IoError("cannot read '" + options.data.string() + "'");
    const auto data = read_saturation_csv(in);
    const auto fit = fit_saturation(data);
    double max_power = 0.0;
    for (const auto& p : data) max_power = std::max(max_power, p.power_uw);
    const fs::path curve = options.out.value_or(output_dir(options.out_dir) / "saturation_fit.csv");
    write_file(curve, [&](std::ostream& o) { write_fit_curve_csv(o, fit, max_power); });
    const auto old = out.precision(8);
    out << "c_max_hz=" << fit.value("c_max_hz") << " +/- " << fit.sigma("c_max_hz") << '\n'
        << "p0_uw=" << fit.value("p0_uw") << " +/- " << fit.sigma("p0_uw") << '\n'
        << "chi2=" << fit.chi_squared << " dof=" << fit.degrees_of_freedom
        << " iterations=" << fit.iterations << '\n'
        << "curve=" << curve.string() << '\n';
    out.precision(old);
    return kOk;
  });
}

}  // namespace demux::cli
