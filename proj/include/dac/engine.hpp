#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dac/circuit.hpp"
#include "dac/model.hpp"

namespace dac {

// Resolves a circuit's leaf labels against a network once, so passes run on
// integer indices. Throws BindError when a leaf names a variable, value or
// parameter the network does not have.
class LeafMap {
 public:
  LeafMap(const Circuit& circuit, const Network& network);

  const LeafRef* ref(NodeId id) const {
    return refs_[id].index >= 0 ? &refs_[id] : nullptr;
  }
  NodeId indicator_node(int variable, int value) const {
    return indicator_nodes_.at(variable).at(value);
  }
  NodeId parameter_node(int family, int flat) const {
    return parameter_nodes_.at(family).at(flat);
  }
  // Node id for a leaf ref; throws BindError if the circuit has no such leaf.
  NodeId node_of(const LeafRef& ref) const;

 private:
  std::vector<LeafRef> refs_;  // per node; index < 0 marks internal nodes
  std::vector<std::vector<NodeId>> indicator_nodes_;
  std::vector<std::vector<NodeId>> parameter_nodes_;
};

// Overrides one leaf's value during a pass, leaving circuit and evidence
// untouched. Used for the multilinearity-based second derivatives.
struct LeafPin {
  NodeId node = -1;
  double value = 0.0;
};

// Workspace of one evaluation/differentiation run: per-node values after the
// upward pass and per-node partial derivatives of the root after the
// downward pass. Tracks how many child edges each pass visited.
struct PassState {
  std::vector<double> value;
  std::vector<double> partial;
  bool has_partials = false;
  std::uint64_t upward_edge_ops = 0;
  std::uint64_t downward_edge_ops = 0;
};

// Sets leaves from the assignment (indicators e(x), parameters theta), then
// sweeps values bottom-up; value[root] = F(e, theta) = Pr(e).
PassState upward_pass(const Circuit& circuit, const LeafMap& leaves,
                      const LeafAssignment& assignment, std::optional<LeafPin> pin = {});
PassState upward_pass(const Circuit& circuit, const LeafMap& leaves, const Network& network,
                      const Evidence& evidence, std::optional<LeafPin> pin = {});
PassState upward_pass(const Circuit& circuit, const Network& network, const Evidence& evidence);

// Sweeps partials top-down: partial[root] = 1; an addition parent passes its
// partial through, a multiplication parent contributes its partial times the
// product of the sibling values (prefix/suffix products, never division).
// Afterwards partial[leaf] = dF/d(leaf).
PassState& downward_pass(const Circuit& circuit, PassState& state);

// Polynomial value at an arbitrary point.
double evaluate_at(const Circuit& circuit, const LeafMap& leaves, const LeafAssignment& assignment);
// Same sweep in single precision (leaf values rounded to float).
float evaluate_at_single(const Circuit& circuit, const LeafMap& leaves,
                         const LeafAssignment& assignment);

// d2F/da db at (evidence, theta). F is multilinear, so dF/da is affine in b
// and the mixed partial is (dF/da)|b=1 - (dF/da)|b=0: two pinned passes.
// a == b returns 0.
double second_derivative(const Circuit& circuit, const LeafMap& leaves, const Network& network,
                         const Evidence& evidence, NodeId a, NodeId b);

// One pinned pair of passes yields d2F/da db for every node a at once;
// entry [b] is forced to 0.
std::vector<double> second_derivatives_for(const Circuit& circuit, const LeafMap& leaves,
                                           const Network& network, const Evidence& evidence,
                                           NodeId b);

// epsilon * sum over non-leaf nodes of |partial * value|: bound on the
// rounding error of value[root] under the per-node model |delta_i| <=
// epsilon * |value_i|.
double rounding_error_bound(const Circuit& circuit, const PassState& state, double epsilon);

}  // namespace dac
