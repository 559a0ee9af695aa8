#include "run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "demux/errors.hpp"
#include "demux/routing.hpp"

namespace demux::cli {
namespace {

using nlohmann::json;

// Typed access to one object of the document with a closed key set.
class Section {
 public:
  Section(const json& node, std::string path, std::initializer_list<const char*> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : node_.items()) {
      if (!keys.contains(key)) throw ConfigError(path_ + ": unknown key '" + key + "'");
    }
  }

  [[nodiscard]] bool has(const char* key) const { return node_.contains(key); }
  [[nodiscard]] const json& raw(const char* key) const { return node_.at(key); }
  [[nodiscard]] const std::string& name() const { return path_; }
  [[nodiscard]] std::string where(const std::string& key) const { return path_ + "." + key; }

  [[nodiscard]] double number(const char* key) const {
    if (!has(key)) throw ConfigError(where(key) + " is required");
    return number_of(node_.at(key), where(key));
  }
  [[nodiscard]] double number(const char* key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  [[nodiscard]] std::optional<double> optional_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }
  [[nodiscard]] std::uint64_t count(const char* key) const {
    const auto& v = node_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(where(key) + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  [[nodiscard]] bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }
  [[nodiscard]] std::string text(const char* key) const {
    const auto& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  static double number_of(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
  }

 private:
  const json& node_;
  std::string path_;
};

const json& section(const json& doc, const char* name) {
  if (!doc.contains(name)) {
    throw ConfigError("missing required section '" + std::string(name) + "'");
  }
  return doc.at(name);
}

EmitterParams parse_emitter(const Section& s) {
  EmitterParams e;
  e.pump_rate_hz = s.number("pump_rate_mhz") * 1e6;
  e.saturation_power_uw = s.number("saturation_power_uw");
  e.max_brightness = s.number("max_brightness");
  e.g2_zero = s.number("g2_zero", 0.0);
  e.polarized_fraction = s.number("polarized_fraction", 1.0);
  e.fiber_coupling = s.number("fiber_coupling", 1.0);
  return e;
}

std::variant<CouplerId, int> parse_branch(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.get<int>();
  throw ConfigError(where + ": expected a coupler id or an output number");
}

DemuxNetwork parse_network(const Section& s) {
  const auto outputs = s.count("outputs");
  if (s.has("nodes") && s.has("topology")) {
    throw ConfigError("network: give either 'topology' or 'nodes', not both");
  }
  if (s.has("nodes")) {
    const auto& nodes = s.raw("nodes");
    if (!nodes.is_array()) throw ConfigError("network.nodes: expected an array");
    std::vector<NodeSpec> specs;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Section node(nodes[i], "network.nodes[" + std::to_string(i) + "]",
                         {"id", "cross", "through"});
      if (!node.has("id") || !node.has("cross") || !node.has("through")) {
        throw ConfigError(node.name() + " needs id, cross and through");
      }
      specs.push_back({node.text("id"),
                       {parse_branch(node.raw("cross"), node.where("cross")),
                        parse_branch(node.raw("through"), node.where("through"))}});
    }
    return DemuxNetwork::from_nodes(specs, outputs);
  }
  const std::string topology = s.has("topology") ? s.text("topology") : "balanced_tree";
  if (topology == "balanced_tree") return DemuxNetwork::balanced_tree(outputs);
  if (topology == "cascade") return DemuxNetwork::cascade(outputs);
  throw ConfigError("network.topology: unknown topology '" + topology + "'");
}

CouplerTable parse_couplers(const json& node, const DemuxNetwork& network) {
  if (!node.is_object()) throw ConfigError("couplers: expected an object");
  CouplerTable table;
  const auto ids = network.coupler_ids();
  const std::set<CouplerId> known(ids.begin(), ids.end());
  for (const auto& [id, value] : node.items()) {
    if (!known.contains(id)) {
      throw ConfigError("couplers: '" + id + "' is not a coupler of the network");
    }
    const Section s(value, "couplers." + id,
                    {"ratios", "ratio_sigmas", "coupling_strength_per_mm", "length_mm",
                     "delta_beta_per_mm_per_v", "state_voltages_v"});
    if (s.has("ratios") == s.has("length_mm")) {
      throw ConfigError(s.name() + " needs either 'ratios' or the physical coupler keys");
    }
    if (s.has("ratios")) {
      const auto& ratios = s.raw("ratios");
      if (!ratios.is_object() || ratios.empty()) {
        throw ConfigError(s.where("ratios") + ": expected an object of state: ratio");
      }
      const json empty = json::object();
      const json& sigmas = s.has("ratio_sigmas") ? s.raw("ratio_sigmas") : empty;
      for (const auto& [state, r] : sigmas.items()) {
        if (!ratios.contains(state)) {
          throw ConfigError(s.where("ratio_sigmas") + ": unknown state '" + state + "'");
        }
      }
      for (const auto& [state, r] : ratios.items()) {
        const double ratio = Section::number_of(r, s.where("ratios." + state));
        if (!(ratio >= 0.0 && ratio <= 1.0)) {
          throw ConfigError(s.where("ratios." + state) + " must lie in [0, 1]");
        }
        const double sigma = sigmas.contains(state)
            ? Section::number_of(sigmas.at(state), s.where("ratio_sigmas." + state))
            : 0.0;
        table.set(id, state, {ratio, sigma});
      }
    } else {
      CouplerParams params;
      params.coupling_strength_per_mm = s.number("coupling_strength_per_mm");
      params.length_mm = s.number("length_mm");
      params.delta_beta_per_volt = s.number("delta_beta_per_mm_per_v");
      if (!s.has("state_voltages_v") || !s.raw("state_voltages_v").is_object()) {
        throw ConfigError(s.where("state_voltages_v") + ": expected an object of state: volts");
      }
      for (const auto& [state, v] : s.raw("state_voltages_v").items()) {
        params.state_voltages[state] = Section::number_of(v, s.where("state_voltages_v." + state));
      }
      try {
        table.set_from_params(id, params);
      } catch (const DomainError& e) {
        throw ConfigError("couplers." + id + ": " + e.what());
      }
    }
  }
  for (const auto& id : ids) {
    if (!table.contains(id)) throw ConfigError("couplers: '" + id + "' is not defined");
  }
  return table;
}

SwitchSchedule parse_schedule(const json* node, const DemuxNetwork& network,
                              double default_bin_s) {
  if (node == nullptr) return schedule_for_cycle(network, network.output_count(), default_bin_s);
  const Section s(*node, "schedule", {"bin_duration_ns", "bins"});
  const double bin_s = s.has("bin_duration_ns") ? s.number("bin_duration_ns") * 1e-9 : default_bin_s;
  if (!s.has("bins")) return schedule_for_cycle(network, network.output_count(), bin_s);
  const auto& bins = s.raw("bins");
  if (!bins.is_array() || bins.empty()) throw ConfigError("schedule.bins: expected a non-empty array");
  SwitchSchedule schedule;
  schedule.bin_duration_s = bin_s;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const Section bin(bins[k], "schedule.bins[" + std::to_string(k) + "]", {"target", "states"});
    if (!bin.has("target") || !bin.has("states")) {
      throw ConfigError(bin.name() + " needs target and states");
    }
    schedule.targets.push_back(bin.count("target"));
    std::map<CouplerId, std::string> states;
    const auto& raw = bin.raw("states");
    if (!raw.is_object()) throw ConfigError(bin.where("states") + ": expected an object");
    for (const auto& [id, state] : raw.items()) {
      if (!state.is_string()) throw ConfigError(bin.where("states." + id) + ": expected a string");
      states[id] = state.get<std::string>();
    }
    schedule.bins.push_back(std::move(states));
  }
  return schedule;
}

LossBudget parse_losses(const Section& s) {
  LossBudget b;
  b.mode_overlap = s.number("mode_overlap", 1.0);
  b.fresnel_in = s.number("fresnel_in", 0.0);
  b.fresnel_out = s.number("fresnel_out", 0.0);
  b.propagation_db_per_cm = s.number("propagation_db_per_cm", 0.0);
  b.device_length_cm = s.number("device_length_cm", 0.0);
  b.measured_transmission = s.optional_number("measured_transmission");
  b.fresnel_removed = s.flag("fresnel_removed", false);
  return b;
}

}  // namespace

double RunConfig::prediction_eta_dm() const {
  if (analysis.eta_dm) return *analysis.eta_dm;
  return switching_efficiency(sim.network, sim.schedule, sim.couplers);
}

PredictionSetup RunConfig::prediction_setup() const {
  return {sim.emitter, sim.budget, prediction_eta_dm(), sim.eta_det, analysis.include_detectors};
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  const Section top(doc, "config",
                    {"config_version", "emitter", "network", "schedule", "couplers", "losses",
                     "detectors", "simulation", "analysis"});
  if (!top.has("config_version")) throw ConfigError("config_version is required");
  if (top.count("config_version") != kConfigVersion) {
    throw ConfigError("unsupported config_version " + top.raw("config_version").dump() +
                      " (this build reads " + std::to_string(kConfigVersion) + ")");
  }

  RunConfig cfg;
  try {
    const Section emitter(section(doc, "emitter"), "emitter",
                          {"pump_rate_mhz", "saturation_power_uw", "max_brightness", "g2_zero",
                           "polarized_fraction", "fiber_coupling", "pump_power_uw"});
    cfg.sim.emitter = parse_emitter(emitter);
    cfg.sim.emitter.validate();
    cfg.sim.pump_power_uw = emitter.number("pump_power_uw", 0.0);

    const Section network(section(doc, "network"), "network", {"outputs", "topology", "nodes"});
    cfg.sim.network = parse_network(network);
    cfg.sim.couplers = parse_couplers(section(doc, "couplers"), cfg.sim.network);
    cfg.sim.schedule = parse_schedule(doc.contains("schedule") ? &doc.at("schedule") : nullptr,
                                      cfg.sim.network, 1.0 / cfg.sim.emitter.pump_rate_hz);
    cfg.sim.schedule.validate(cfg.sim.network);
    for (const auto& bin : cfg.sim.schedule.bins) {
      for (const auto& [id, state] : bin) {
        if (!cfg.sim.couplers.contains(id, state)) {
          throw ConfigError("schedule uses state '" + state + "' of coupler '" + id +
                            "', which couplers." + id + " does not define");
        }
      }
    }

    const Section losses(section(doc, "losses"), "losses",
                         {"mode_overlap", "fresnel_in", "fresnel_out", "propagation_db_per_cm",
                          "device_length_cm", "measured_transmission", "fresnel_removed"});
    cfg.sim.budget = parse_losses(losses);
    cfg.sim.budget.validate();

    const Section detectors(section(doc, "detectors"), "detectors",
                            {"efficiency", "dark_count_probability"});
    cfg.sim.eta_det = detectors.number("efficiency");
    cfg.sim.dark_count_probability = detectors.number("dark_count_probability", 0.0);

    if (doc.contains("simulation")) {
      const Section sim(doc.at("simulation"), "simulation",
                        {"pulses", "duration_s", "seed", "shards"});
      if (sim.has("pulses") && sim.has("duration_s")) {
        throw ConfigError("simulation: give either pulses or duration_s, not both");
      }
      if (sim.has("pulses")) cfg.sim.pulse_count = sim.count("pulses");
      if (sim.has("duration_s")) cfg.sim.duration_s = sim.number("duration_s");
      if (sim.has("seed")) cfg.sim.rng_seed = sim.count("seed");
      if (sim.has("shards")) cfg.shards = sim.count("shards");
      if (cfg.shards == 0) throw ConfigError("simulation.shards must be >= 1");
    }
    if (!cfg.sim.pulse_count && !cfg.sim.duration_s) cfg.sim.pulse_count = 0;

    if (doc.contains("analysis")) {
      const Section a(doc.at("analysis"), "analysis",
                      {"eta_dm", "include_detectors", "n_max", "max_delay_bins",
                       "nfold_window_ns"});
      cfg.analysis.eta_dm = a.optional_number("eta_dm");
      cfg.analysis.include_detectors = a.flag("include_detectors", false);
      if (a.has("n_max")) cfg.analysis.n_max = static_cast<int>(a.count("n_max"));
      if (a.has("max_delay_bins")) {
        cfg.analysis.max_delay_bins = static_cast<int>(a.count("max_delay_bins"));
      }
      cfg.analysis.nfold_window_ns = a.optional_number("nfold_window_ns");
    }
    cfg.sim.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

}  // namespace demux::cli
