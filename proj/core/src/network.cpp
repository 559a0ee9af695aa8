#include "demux/network.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>

#include "demux/errors.hpp"

namespace demux {
namespace {

std::string child_name(const std::variant<CouplerId, int>& child) {
  if (const auto* id = std::get_if<CouplerId>(&child)) return *id;
  return "output " + std::to_string(std::get<int>(child));
}

}  // namespace

DemuxNetwork DemuxNetwork::from_nodes(const std::vector<NodeSpec>& specs,
                                      std::size_t outputs) {
  if (outputs == 0) throw ConfigError("network needs at least one output");

  DemuxNetwork net;
  net.outputs_ = outputs;
  if (specs.empty()) {
    if (outputs != 1) {
      throw ConfigError("a network with " + std::to_string(outputs) +
                        " outputs needs couplers");
    }
    net.index_paths();
    return net;
  }
  if (specs.size() != outputs - 1) {
    throw ConfigError("a binary network with " + std::to_string(outputs) +
                      " outputs has " + std::to_string(outputs - 1) +
                      " couplers, got " + std::to_string(specs.size()));
  }

  std::map<CouplerId, std::size_t> index;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].id.empty()) throw ConfigError("coupler id must not be empty");
    if (!index.emplace(specs[i].id, i).second) {
      throw ConfigError("duplicate coupler id '" + specs[i].id + "'");
    }
  }

  std::set<std::size_t> referenced;
  std::set<int> seen_outputs;
  net.nodes_.resize(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Node& node = net.nodes_[i];
    node.id = specs[i].id;
    for (int b = 0; b < 2; ++b) {
      const auto& child = specs[i].branches[b];
      if (const auto* id = std::get_if<CouplerId>(&child)) {
        const auto it = index.find(*id);
        if (it == index.end()) {
          throw ConfigError("coupler '" + node.id + "' references unknown coupler '" +
                            *id + "'");
        }
        if (!referenced.insert(it->second).second) {
          throw ConfigError("coupler '" + *id + "' has more than one parent");
        }
        node.branches[b] = {false, it->second};
      } else {
        const int out = std::get<int>(child);
        if (out < 1 || static_cast<std::size_t>(out) > outputs) {
          throw ConfigError("coupler '" + node.id + "' references " +
                            child_name(child) + " outside 1.." +
                            std::to_string(outputs));
        }
        if (!seen_outputs.insert(out).second) {
          throw ConfigError(child_name(child) + " is reached by more than one branch");
        }
        node.branches[b] = {true, static_cast<std::size_t>(out)};
      }
    }
  }
  if (seen_outputs.size() != outputs) {
    throw ConfigError("not every output channel is connected");
  }

  std::optional<std::size_t> root;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!referenced.contains(i)) {
      if (root) throw ConfigError("network has more than one root coupler");
      root = i;
    }
  }
  if (!root) throw ConfigError("network has no root coupler (cycle)");
  net.root_ = {false, *root};
  net.index_paths();
  return net;
}

DemuxNetwork DemuxNetwork::balanced_tree(std::size_t outputs) {
  if (outputs == 0) throw ConfigError("network needs at least one output");
  if (outputs == 1) return {};

  // Breadth-first expansion of output ranges gives the s1, s2, ... numbering.
  struct Pending {
    std::size_t first, last;  // inclusive output range
  };
  std::vector<Pending> queue{{1, outputs}};
  std::vector<NodeSpec> specs;
  std::size_t next_id = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto [first, last] = queue[head];
    const std::size_t split = first + (last - first + 1 + 1) / 2 - 1;
    NodeSpec spec;
    spec.id = "s" + std::to_string(head + 1);
    const std::array<Pending, 2> halves{{{first, split}, {split + 1, last}}};
    for (int b = 0; b < 2; ++b) {
      if (halves[b].first == halves[b].last) {
        spec.branches[b] = static_cast<int>(halves[b].first);
      } else {
        spec.branches[b] = "s" + std::to_string(++next_id);
        queue.push_back(halves[b]);
      }
    }
    specs.push_back(std::move(spec));
  }
  return from_nodes(specs, outputs);
}

DemuxNetwork DemuxNetwork::cascade(std::size_t outputs) {
  if (outputs == 0) throw ConfigError("network needs at least one output");
  std::vector<NodeSpec> specs;
  for (std::size_t k = 1; k < outputs; ++k) {
    NodeSpec spec;
    spec.id = "s" + std::to_string(k);
    spec.branches[0] = static_cast<int>(k);
    if (k + 1 == outputs) {
      spec.branches[1] = static_cast<int>(outputs);
    } else {
      spec.branches[1] = "s" + std::to_string(k + 1);
    }
    specs.push_back(std::move(spec));
  }
  return from_nodes(specs, outputs);
}

std::vector<CouplerId> DemuxNetwork::coupler_ids() const {
  std::vector<CouplerId> ids;
  ids.reserve(nodes_.size());
  for (const auto& node : nodes_) ids.push_back(node.id);
  return ids;
}

std::optional<std::size_t> DemuxNetwork::find(const CouplerId& id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id == id) return i;
  }
  return std::nullopt;
}

const std::vector<DemuxNetwork::PathStep>& DemuxNetwork::path_to(
    std::size_t output) const {
  if (output < 1 || output > outputs_) {
    throw DomainError("output " + std::to_string(output) + " outside 1.." +
                      std::to_string(outputs_));
  }
  return paths_[output - 1];
}

std::vector<NodeSpec> DemuxNetwork::to_specs() const {
  std::vector<NodeSpec> specs;
  for (const auto& node : nodes_) {
    NodeSpec spec;
    spec.id = node.id;
    for (int b = 0; b < 2; ++b) {
      const Branch& br = node.branches[b];
      if (br.is_output) {
        spec.branches[b] = static_cast<int>(br.index);
      } else {
        spec.branches[b] = nodes_[br.index].id;
      }
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

void DemuxNetwork::index_paths() {
  paths_.assign(outputs_, {});
  std::vector<PathStep> trail;
  std::size_t visited = 0;
  auto walk = [&](auto&& self, const Branch& at) -> void {
    if (at.is_output) {
      paths_[at.index - 1] = trail;
      return;
    }
    if (++visited > nodes_.size()) throw ConfigError("network contains a cycle");
    for (int b = 0; b < 2; ++b) {
      trail.push_back({at.index, b});
      self(self, nodes_[at.index].branches[b]);
      trail.pop_back();
    }
  };
  walk(walk, root_);
  if (visited != nodes_.size()) {
    throw ConfigError("network has couplers unreachable from the input");
  }
}

}  // namespace demux
