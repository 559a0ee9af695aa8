#include "demux/routing.hpp"

#include <algorithm>
#include <string>

#include "demux/errors.hpp"

namespace demux {

std::vector<double> routing_matrix(
    const DemuxNetwork& network, const std::map<CouplerId, CouplerState>& states) {
  std::vector<double> cross(network.nodes().size());
  for (std::size_t i = 0; i < cross.size(); ++i) {
    const auto& id = network.nodes()[i].id;
    const auto it = states.find(id);
    if (it == states.end()) {
      throw ConfigError("no state given for coupler '" + id + "'");
    }
    const double r = it->second.splitting_ratio;
    if (!(r >= 0.0 && r <= 1.0)) {
      throw DomainError("splitting ratio of '" + id + "' outside [0, 1]");
    }
    cross[i] = r;
  }
  std::vector<double> out(network.output_count());
  for (std::size_t o = 1; o <= out.size(); ++o) {
    double p = 1.0;
    for (const auto& step : network.path_to(o)) {
      p *= step.branch == 0 ? cross[step.node] : 1.0 - cross[step.node];
    }
    out[o - 1] = p;
  }
  return out;
}

std::map<CouplerId, CouplerState> states_for_bin(const SwitchSchedule& schedule,
                                                 std::size_t bin,
                                                 const CouplerTable& couplers) {
  std::map<CouplerId, CouplerState> states;
  for (const auto& [id, state] : schedule.bins.at(bin)) {
    states[id] = {id, couplers.ratio(id, state)};
  }
  return states;
}

std::vector<std::vector<double>> bin_routing(const DemuxNetwork& network,
                                             const SwitchSchedule& schedule,
                                             const CouplerTable& couplers) {
  std::vector<std::vector<double>> rows;
  rows.reserve(schedule.period());
  for (std::size_t k = 0; k < schedule.period(); ++k) {
    rows.push_back(routing_matrix(network, states_for_bin(schedule, k, couplers)));
  }
  return rows;
}

double switching_efficiency(const std::vector<std::vector<double>>& routing,
                            const std::vector<std::size_t>& targets) {
  if (routing.empty() || routing.size() != targets.size()) {
    throw ConfigError("switching efficiency needs one target per bin");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < routing.size(); ++k) {
    sum += routing[k].at(targets[k] - 1);
  }
  return sum / static_cast<double>(routing.size());
}

double switching_efficiency(const DemuxNetwork& network,
                            const SwitchSchedule& schedule,
                            const CouplerTable& couplers) {
  schedule.validate(network);
  if (schedule.period() != network.output_count()) {
    throw ConfigError("schedule period " + std::to_string(schedule.period()) +
                      " differs from the output count " +
                      std::to_string(network.output_count()));
  }
  return switching_efficiency(bin_routing(network, schedule, couplers),
                              schedule.targets);
}

std::vector<std::uint64_t> channel_offsets(const SwitchSchedule& schedule,
                                           std::span<const std::uint32_t> channels) {
  std::vector<std::uint64_t> bins;
  bins.reserve(channels.size());
  for (const auto c : channels) bins.push_back(schedule.bin_for_output(c));
  if (bins.empty()) return bins;
  const auto first = *std::min_element(bins.begin(), bins.end());
  for (auto& b : bins) b -= first;
  return bins;
}

double coincidence_factor(const DemuxNetwork& network,
                          const SwitchSchedule& schedule,
                          const CouplerTable& couplers,
                          std::span<const std::uint32_t> channels) {
  schedule.validate(network);
  const auto routing = bin_routing(network, schedule, couplers);
  const auto offsets = channel_offsets(schedule, channels);
  const std::size_t period = schedule.period();
  double sum = 0.0;
  for (std::size_t phase = 0; phase < period; ++phase) {
    double p = 1.0;
    for (std::size_t j = 0; j < channels.size(); ++j) {
      p *= routing[(phase + offsets[j]) % period].at(channels[j] - 1);
    }
    sum += p;
  }
  return sum / static_cast<double>(period);
}

}  // namespace demux
