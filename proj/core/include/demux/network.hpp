#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "demux/coupler.hpp"

namespace demux {

/// Declarative description of one coupler node. A branch names either
/// another coupler or an output channel (1-based).
struct NodeSpec {
  CouplerId id;
  std::array<std::variant<CouplerId, int>, 2> branches;
};

/// Rooted binary tree of couplers routing one input to n output channels.
/// Branch 0 of every coupler is its cross port.
class DemuxNetwork {
 public:
  struct Branch {
    bool is_output = true;
    std::size_t index = 1;  // output channel (1-based) or node index
  };
  struct Node {
    CouplerId id;
    std::array<Branch, 2> branches;
  };
  struct PathStep {
    std::size_t node = 0;
    int branch = 0;
  };

  /// A single output reached without any coupler.
  DemuxNetwork() = default;

  static DemuxNetwork from_nodes(const std::vector<NodeSpec>& specs,
                                 std::size_t outputs);

  /// Balanced tree; ids s1, s2, ... in breadth-first order. For four outputs:
  /// s1 picks {1,2} vs {3,4}, s2 splits 1/2 and s3 splits 3/4.
  static DemuxNetwork balanced_tree(std::size_t outputs);

  /// Chain of couplers; s_k splits output k from the rest.
  static DemuxNetwork cascade(std::size_t outputs);

  [[nodiscard]] std::size_t output_count() const { return outputs_; }
  [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
  [[nodiscard]] const Branch& root() const { return root_; }
  [[nodiscard]] std::vector<CouplerId> coupler_ids() const;
  [[nodiscard]] std::optional<std::size_t> find(const CouplerId& id) const;

  /// Couplers traversed from the input to `output`, root first.
  [[nodiscard]] const std::vector<PathStep>& path_to(std::size_t output) const;

  [[nodiscard]] std::vector<NodeSpec> to_specs() const;

 private:
  void index_paths();

  std::size_t outputs_ = 1;
  std::vector<Node> nodes_;
  Branch root_{};
  std::vector<std::vector<PathStep>> paths_{std::vector<PathStep>{}};
};

}  // namespace demux
