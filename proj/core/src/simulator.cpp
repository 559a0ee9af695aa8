#include "demux/simulator.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "demux/errors.hpp"
#include "demux/rng.hpp"
#include "demux/routing.hpp"

namespace demux {
namespace {

class Fnv1a {
 public:
  void add(std::string_view text) {
    for (const unsigned char c : text) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ull;
    }
    hash_ ^= 0xff;  // field separator
    hash_ *= 0x100000001b3ull;
  }
  void add(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    add(std::string_view(buf));
  }
  void add(std::uint64_t value) { add(std::to_string(value)); }

  [[nodiscard]] std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, hash_);
    return buf;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

// Cumulative routing distribution per schedule bin; the last entry is forced
// to 1 so a uniform draw always lands on an output.
std::vector<std::vector<double>> routing_cdf(const SimConfig& config) {
  auto rows = bin_routing(config.network, config.schedule, config.couplers);
  for (auto& row : rows) {
    double acc = 0.0;
    for (auto& p : row) {
      acc += p;
      p = acc;
    }
    row.back() = 1.0;
  }
  return rows;
}

std::uint32_t pick_output(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<std::uint32_t>(
      std::min<std::ptrdiff_t>(it - cdf.begin(), std::ssize(cdf) - 1) + 1);
}

}  // namespace

double EmissionModel::g2_zero() const {
  const double mean = mean_photons();
  return mean > 0.0 ? 2.0 * p_two / (mean * mean) : 0.0;
}

EmissionModel emission_model(const EmitterParams& emitter, double pump_power_uw) {
  emitter.validate();
  const double eta = emitter.brightness_at(pump_power_uw);
  const double x = emitter.g2_zero * eta;
  if (x == 0.0) return {eta, 0.0};
  if (x > 0.5) {
    throw ConfigError(
        "g2_zero x brightness exceeds 1/2; no two-photon probability reproduces "
        "the requested g2(0)");
  }
  // Smaller root of x (1 + r)^2 = 2 r, written without cancellation.
  const double r = x / ((1.0 - x) + std::sqrt(1.0 - 2.0 * x));
  return {eta, eta * r};
}

void SimConfig::validate() const {
  emitter.validate();
  budget.validate();
  schedule.validate(network);
  for (const auto& bin : schedule.bins) {
    for (const auto& [id, state] : bin) (void)couplers.at(id, state);
  }
  if (!(eta_det >= 0.0 && eta_det <= 1.0)) {
    throw ConfigError("detector efficiency must lie in [0, 1]");
  }
  if (!(dark_count_probability >= 0.0 && dark_count_probability <= 1.0)) {
    throw ConfigError("dark count probability must lie in [0, 1]");
  }
  if (!(pump_power_uw >= 0.0)) throw ConfigError("pump power must be >= 0");
  if (pulse_count.has_value() == duration_s.has_value()) {
    throw ConfigError("set exactly one of pulse_count and duration_s");
  }
  if (duration_s && !(*duration_s >= 0.0)) {
    throw ConfigError("duration_s must be >= 0");
  }
  if (pulse_period_ps() == 0) throw ConfigError("pump rate above 1 THz");
  (void)emission_model(emitter, pump_power_uw);
}

std::uint64_t SimConfig::resolved_pulse_count() const {
  if (pulse_count) return *pulse_count;
  if (duration_s) {
    return static_cast<std::uint64_t>(std::llround(*duration_s * emitter.pump_rate_hz));
  }
  throw ConfigError("set exactly one of pulse_count and duration_s");
}

std::uint64_t SimConfig::pulse_period_ps() const {
  return static_cast<std::uint64_t>(std::llround(1e12 / emitter.pump_rate_hz));
}

std::string SimConfig::digest() const {
  Fnv1a h;
  h.add(std::string_view("demux-sim-v1"));
  h.add(emitter.pump_rate_hz);
  h.add(emitter.saturation_power_uw);
  h.add(emitter.max_brightness);
  h.add(emitter.g2_zero);
  h.add(emitter.polarized_fraction);
  h.add(emitter.fiber_coupling);
  h.add(static_cast<std::uint64_t>(network.output_count()));
  for (const auto& spec : network.to_specs()) {
    h.add(spec.id);
    for (const auto& branch : spec.branches) {
      if (const auto* id = std::get_if<CouplerId>(&branch)) {
        h.add(std::string_view("c:" + *id));
      } else {
        h.add(static_cast<std::uint64_t>(std::get<int>(branch)));
      }
    }
  }
  for (std::size_t k = 0; k < schedule.period(); ++k) {
    h.add(static_cast<std::uint64_t>(schedule.targets[k]));
    for (const auto& [id, state] : schedule.bins[k]) {
      h.add(id);
      h.add(state);
    }
  }
  for (const auto& [id, states] : couplers.entries()) {
    h.add(id);
    for (const auto& [state, value] : states) {
      h.add(state);
      h.add(value.ratio);
    }
  }
  h.add(budget.mode_overlap);
  h.add(budget.fresnel_in);
  h.add(budget.fresnel_out);
  h.add(budget.propagation_db_per_cm);
  h.add(budget.device_length_cm);
  h.add(budget.measured_transmission.value_or(-1.0));
  h.add(static_cast<std::uint64_t>(budget.fresnel_removed));
  h.add(eta_det);
  h.add(dark_count_probability);
  h.add(pump_power_uw);
  return h.hex();
}

std::vector<TimeTagRecord> simulate_pulses(const SimConfig& config,
                                           std::uint64_t first,
                                           std::uint64_t last) {
  const EmissionModel emission = emission_model(config.emitter, config.pump_power_uw);
  const auto cdf = routing_cdf(config);
  const double transmission = compose_transmission(config.budget);
  const double eta_det = config.eta_det;
  const double dark = config.dark_count_probability;
  const std::uint64_t period_ps = config.pulse_period_ps();
  const std::size_t period = config.schedule.period();
  const auto channels = static_cast<std::uint32_t>(config.network.output_count());
  const PulseRandom rng(config.rng_seed);

  std::vector<TimeTagRecord> records;
  if (last > first) {
    const double expected = (last - first) *
        (emission.mean_photons() * transmission * eta_det + dark * channels);
    records.reserve(static_cast<std::size_t>(expected * 1.1) + 16);
  }
  std::vector<bool> clicked(channels + 1, false);

  for (std::uint64_t pulse = first; pulse < last; ++pulse) {
    const double u = rng.uniform(pulse, static_cast<std::uint32_t>(DrawPurpose::emission));
    const unsigned photons = u < emission.p_two ? 2u : (u < emission.p_any ? 1u : 0u);
    if (photons == 0 && dark == 0.0) continue;

    bool any = false;
    const auto& bin_cdf = cdf[pulse % period];
    for (unsigned i = 0; i < photons; ++i) {
      const std::uint32_t out = pick_output(bin_cdf, rng.uniform(pulse, PulseRandom::route(i)));
      if (rng.uniform(pulse, PulseRandom::transmit(i)) >= transmission) continue;
      if (rng.uniform(pulse, PulseRandom::detect(i)) >= eta_det) continue;
      clicked[out] = true;
      any = true;
    }
    if (dark > 0.0) {
      for (std::uint32_t c = 1; c <= channels; ++c) {
        if (rng.uniform(pulse, PulseRandom::dark_count(c)) < dark) {
          clicked[c] = true;
          any = true;
        }
      }
    }
    if (!any) continue;
    // Threshold detectors: at most one click per channel and pulse.
    for (std::uint32_t c = 1; c <= channels; ++c) {
      if (clicked[c]) {
        records.push_back({c, pulse * period_ps});
        clicked[c] = false;
      }
    }
  }
  return records;
}

namespace {

StreamMetadata metadata_for(const SimConfig& config) {
  StreamMetadata meta;
  meta.config_digest = config.digest();
  meta.pulse_period_ps = config.pulse_period_ps();
  meta.pulse_count = config.resolved_pulse_count();
  meta.channel_count = static_cast<std::uint32_t>(config.network.output_count());
  meta.schedule_period = static_cast<std::uint32_t>(config.schedule.period());
  meta.seed = config.rng_seed;
  meta.pump_rate_hz = config.emitter.pump_rate_hz;
  return meta;
}

}  // namespace

TimeTagStream simulate(const SimConfig& config) {
  config.validate();
  TimeTagStream stream;
  stream.metadata = metadata_for(config);
  stream.records = simulate_pulses(config, 0, stream.metadata.pulse_count);
  return stream;
}

TimeTagStream shard_and_merge(const SimConfig& config, std::size_t n_shards) {
  if (n_shards == 0) throw DomainError("n_shards must be >= 1");
  config.validate();
  TimeTagStream stream;
  stream.metadata = metadata_for(config);
  const std::uint64_t total = stream.metadata.pulse_count;

  std::vector<std::vector<TimeTagRecord>> parts(n_shards);
  std::vector<std::exception_ptr> failures(n_shards);
  {
    std::vector<std::jthread> workers;
    workers.reserve(n_shards);
    for (std::size_t s = 0; s < n_shards; ++s) {
      const std::uint64_t first = total * s / n_shards;
      const std::uint64_t last = total * (s + 1) / n_shards;
      workers.emplace_back([&config, &parts, &failures, s, first, last] {
        try {
          parts[s] = simulate_pulses(config, first, last);
        } catch (...) {
          failures[s] = std::current_exception();
        }
      });
    }
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  std::size_t size = 0;
  for (const auto& part : parts) size += part.size();
  stream.records.reserve(size);
  // Shards cover contiguous, ordered pulse ranges: concatenation is the merge.
  for (auto& part : parts) {
    stream.records.insert(stream.records.end(), part.begin(), part.end());
  }
  return stream;
}

}  // namespace demux
