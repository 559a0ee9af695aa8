#include "demux/schedule.hpp"

#include "demux/errors.hpp"

namespace demux {

std::size_t SwitchSchedule::bin_for_output(std::size_t output) const {
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (targets[k] == output) return k;
  }
  throw ConfigError("schedule never targets output " + std::to_string(output));
}

void SwitchSchedule::validate(const DemuxNetwork& network) const {
  if (bins.empty()) throw ConfigError("schedule period must be >= 1");
  if (targets.size() != bins.size()) {
    throw ConfigError("schedule needs exactly one target per bin");
  }
  if (!(bin_duration_s > 0.0)) throw ConfigError("bin duration must be > 0");
  const auto ids = network.coupler_ids();
  for (std::size_t k = 0; k < bins.size(); ++k) {
    for (const auto& id : ids) {
      if (!bins[k].contains(id)) {
        throw ConfigError("schedule bin " + std::to_string(k) +
                          " assigns no state to coupler '" + id + "'");
      }
    }
    for (const auto& [id, state] : bins[k]) {
      if (!network.find(id)) {
        throw ConfigError("schedule bin " + std::to_string(k) +
                          " references unknown coupler '" + id + "'");
      }
      if (state.empty()) throw ConfigError("empty state name for '" + id + "'");
    }
    if (targets[k] < 1 || targets[k] > network.output_count()) {
      throw ConfigError("schedule bin " + std::to_string(k) +
                        " targets a nonexistent output");
    }
  }
}

SwitchSchedule schedule_for_cycle(const DemuxNetwork& network,
                                  std::size_t n_outputs, double bin_duration_s) {
  if (n_outputs != network.output_count()) {
    throw ConfigError("cyclic schedule for " + std::to_string(n_outputs) +
                      " outputs does not match a network with " +
                      std::to_string(network.output_count()));
  }
  SwitchSchedule schedule;
  schedule.bin_duration_s = bin_duration_s;
  for (std::size_t out = 1; out <= n_outputs; ++out) {
    std::map<CouplerId, std::string> states;
    for (const auto& node : network.nodes()) states[node.id] = kStateOn;
    for (const auto& step : network.path_to(out)) {
      states[network.nodes()[step.node].id] = step.branch == 0 ? kStateOn : kStateOff;
    }
    schedule.bins.push_back(std::move(states));
    schedule.targets.push_back(out);
  }
  schedule.validate(network);
  return schedule;
}

}  // namespace demux
