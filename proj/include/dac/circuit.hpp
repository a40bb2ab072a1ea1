#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dac/model.hpp"

namespace dac {

using NodeId = std::int32_t;

enum class NodeKind : std::uint8_t { Indicator, Parameter, Add, Mul };

struct CircuitNode {
  NodeKind kind = NodeKind::Add;
  std::int32_t label = -1;        // leaves: index into the label tables below
  std::vector<NodeId> children;   // Add/Mul only; all ids precede this node

  friend bool operator==(const CircuitNode&, const CircuitNode&) = default;
};

struct IndicatorLabel {
  std::string variable;
  std::string value;
  friend bool operator==(const IndicatorLabel&, const IndicatorLabel&) = default;
};

struct ParameterLabel {
  std::string child;
  std::string child_value;
  std::vector<std::string> parents;
  std::vector<std::string> parent_values;
  friend bool operator==(const ParameterLabel&, const ParameterLabel&) = default;
};

// Rooted DAG of addition/multiplication nodes over indicator and parameter
// leaves, stored in topological order (children before parents). The leaves
// carry name labels so a circuit file can be re-bound to any network with the
// same structure.
class Circuit {
 public:
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const CircuitNode& node(NodeId id) const { return nodes_.at(id); }
  NodeId root() const { return root_; }

  bool is_leaf(NodeId id) const {
    const NodeKind k = nodes_.at(id).kind;
    return k == NodeKind::Indicator || k == NodeKind::Parameter;
  }
  const IndicatorLabel& indicator_label(NodeId id) const;
  const ParameterLabel& parameter_label(NodeId id) const;

  std::int64_t edge_count() const;
  int count_of(NodeKind kind) const;
  int max_arity() const;

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  friend class CircuitBuilder;
  friend Circuit deserialize_circuit(const std::string&);

  std::vector<CircuitNode> nodes_;
  std::vector<IndicatorLabel> indicator_labels_;
  std::vector<ParameterLabel> parameter_labels_;
  NodeId root_ = -1;
};

// Append-only construction with leaf deduplication: one node per (variable,
// value) indicator and one per family-table entry. Internal nodes are never
// hashed; single-child Add/Mul requests return the child unchanged.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(const Network& network);

  NodeId indicator(int variable, int value);
  NodeId parameter(int family, int flat);
  NodeId add(std::vector<NodeId> children);
  NodeId mul(std::vector<NodeId> children);

  int node_count() const { return static_cast<int>(circuit_.nodes_.size()); }
  const Network& network() const { return network_; }

  Circuit finish(NodeId root);

 private:
  const Network& network_;
  Circuit circuit_;
  std::vector<std::vector<NodeId>> indicator_ids_;  // [variable][value]
  std::vector<std::vector<NodeId>> parameter_ids_;  // [family][flat]
};

// Line-oriented circuit text ("dac 1" header). Node i is the (i+2)-th line;
// children always reference earlier nodes; the single "r" line comes last.
std::string serialize_circuit(const Circuit& circuit);
Circuit deserialize_circuit(const std::string& text);

}  // namespace dac
