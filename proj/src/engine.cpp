#include "dac/engine.hpp"

#include <cmath>

namespace dac {

LeafMap::LeafMap(const Circuit& circuit, const Network& network) {
  refs_.assign(circuit.node_count(), LeafRef{LeafRef::Kind::Indicator, -1, -1});
  indicator_nodes_.resize(network.variable_count());
  parameter_nodes_.resize(network.variable_count());
  for (int i = 0; i < network.variable_count(); ++i) {
    indicator_nodes_[i].assign(network.domain_size(i), -1);
    parameter_nodes_[i].assign(network.table_size(i), -1);
  }

  for (NodeId id = 0; id < circuit.node_count(); ++id) {
    const CircuitNode& n = circuit.node(id);
    if (n.kind == NodeKind::Indicator) {
      const IndicatorLabel& l = circuit.indicator_label(id);
      const int var = network.variable_index(l.variable);
      if (var < 0) throw BindError("circuit indicator references unknown variable '" + l.variable + "'");
      const int val = network.value_index(var, l.value);
      if (val < 0)
        throw BindError("circuit indicator references unknown value '" + l.variable + "=" +
                        l.value + "'");
      refs_[id] = LeafRef::indicator(var, val);
      indicator_nodes_[var][val] = id;
    } else if (n.kind == NodeKind::Parameter) {
      const ParameterLabel& l = circuit.parameter_label(id);
      const int fam = network.variable_index(l.child);
      if (fam < 0) throw BindError("circuit parameter references unknown variable '" + l.child + "'");
      const Family& f = network.family(fam);
      const int cval = network.value_index(fam, l.child_value);
      if (cval < 0)
        throw BindError("circuit parameter references unknown value '" + l.child + "=" +
                        l.child_value + "'");
      if (l.parents.size() != f.parents.size())
        throw BindError("circuit parameter for '" + l.child +
                        "' does not match the network's parent set");
      std::vector<int> pvals(f.parents.size());
      std::vector<char> matched(f.parents.size(), 0);
      for (std::size_t j = 0; j < l.parents.size(); ++j) {
        const int pvar = network.variable_index(l.parents[j]);
        if (pvar < 0)
          throw BindError("circuit parameter references unknown parent '" + l.parents[j] + "'");
        // Locate pvar in the network's parent list; order in the file may differ.
        int slot = -1;
        for (std::size_t k = 0; k < f.parents.size(); ++k)
          if (f.parents[k] == pvar && !matched[k]) {
            slot = static_cast<int>(k);
            break;
          }
        if (slot < 0)
          throw BindError("circuit parameter for '" + l.child + "' lists '" + l.parents[j] +
                          "', which is not an unmatched parent in the network");
        const int pval = network.value_index(pvar, l.parent_values[j]);
        if (pval < 0)
          throw BindError("circuit parameter references unknown value '" + l.parents[j] + "=" +
                          l.parent_values[j] + "'");
        matched[slot] = 1;
        pvals[slot] = pval;
      }
      const int flat = network.flat_index(fam, cval, pvals);
      refs_[id] = LeafRef::parameter(fam, flat);
      parameter_nodes_[fam][flat] = id;
    }
  }
}

NodeId LeafMap::node_of(const LeafRef& ref) const {
  const NodeId id = ref.kind == LeafRef::Kind::Indicator
                        ? indicator_nodes_.at(ref.index).at(ref.value)
                        : parameter_nodes_.at(ref.index).at(ref.value);
  if (id < 0) throw BindError("circuit has no leaf for the requested variable");
  return id;
}

namespace {

template <typename Scalar>
void forward_sweep(const Circuit& circuit, std::vector<Scalar>& value, std::uint64_t* edge_ops) {
  std::uint64_t ops = 0;
  for (NodeId id = 0; id < circuit.node_count(); ++id) {
    const CircuitNode& n = circuit.node(id);
    if (n.kind == NodeKind::Add) {
      Scalar s = 0;
      for (NodeId c : n.children) s += value[c];
      value[id] = s;
      ops += n.children.size();
    } else if (n.kind == NodeKind::Mul) {
      Scalar p = 1;
      for (NodeId c : n.children) p *= value[c];
      value[id] = p;
      ops += n.children.size();
    }
  }
  if (edge_ops) *edge_ops = ops;
}

template <typename Scalar>
void fill_leaves(const Circuit& circuit, const LeafMap& leaves, const LeafAssignment& assignment,
                 const std::optional<LeafPin>& pin, std::vector<Scalar>& value) {
  value.assign(circuit.node_count(), Scalar(0));
  for (NodeId id = 0; id < circuit.node_count(); ++id)
    if (const LeafRef* ref = leaves.ref(id)) value[id] = static_cast<Scalar>(assignment.get(*ref));
  if (pin) value.at(pin->node) = static_cast<Scalar>(pin->value);
}

}  // namespace

PassState upward_pass(const Circuit& circuit, const LeafMap& leaves,
                      const LeafAssignment& assignment, std::optional<LeafPin> pin) {
  PassState state;
  fill_leaves(circuit, leaves, assignment, pin, state.value);
  forward_sweep(circuit, state.value, &state.upward_edge_ops);
  return state;
}

PassState upward_pass(const Circuit& circuit, const LeafMap& leaves, const Network& network,
                      const Evidence& evidence, std::optional<LeafPin> pin) {
  return upward_pass(circuit, leaves, LeafAssignment::at_evidence(network, evidence), pin);
}

PassState upward_pass(const Circuit& circuit, const Network& network, const Evidence& evidence) {
  return upward_pass(circuit, LeafMap(circuit, network), network, evidence);
}

PassState& downward_pass(const Circuit& circuit, PassState& state) {
  const int n = circuit.node_count();
  if (static_cast<int>(state.value.size()) != n)
    throw std::invalid_argument("downward_pass needs the upward pass's values");
  state.partial.assign(n, 0.0);
  state.partial[circuit.root()] = 1.0;
  std::uint64_t ops = 0;
  std::vector<double> prefix, suffix;
  for (NodeId id = n - 1; id >= 0; --id) {
    const CircuitNode& node = circuit.node(id);
    if (node.children.empty()) continue;
    const double p = state.partial[id];
    if (node.kind == NodeKind::Add) {
      for (NodeId c : node.children) state.partial[c] += p;
      ops += node.children.size();
    } else {
      const std::size_t k = node.children.size();
      prefix.resize(k);
      suffix.resize(k);
      double acc = 1.0;
      for (std::size_t j = 0; j < k; ++j) {
        prefix[j] = acc;
        acc *= state.value[node.children[j]];
      }
      acc = 1.0;
      for (std::size_t j = k; j-- > 0;) {
        suffix[j] = acc;
        acc *= state.value[node.children[j]];
      }
      for (std::size_t j = 0; j < k; ++j)
        state.partial[node.children[j]] += p * prefix[j] * suffix[j];
      ops += k;
    }
  }
  state.downward_edge_ops = ops;
  state.has_partials = true;
  return state;
}

double evaluate_at(const Circuit& circuit, const LeafMap& leaves,
                   const LeafAssignment& assignment) {
  std::vector<double> value;
  fill_leaves(circuit, leaves, assignment, std::nullopt, value);
  forward_sweep(circuit, value, nullptr);
  return value[circuit.root()];
}

float evaluate_at_single(const Circuit& circuit, const LeafMap& leaves,
                         const LeafAssignment& assignment) {
  std::vector<float> value;
  fill_leaves(circuit, leaves, assignment, std::nullopt, value);
  forward_sweep(circuit, value, nullptr);
  return value[circuit.root()];
}

std::vector<double> second_derivatives_for(const Circuit& circuit, const LeafMap& leaves,
                                           const Network& network, const Evidence& evidence,
                                           NodeId b) {
  if (!circuit.is_leaf(b)) throw std::invalid_argument("second derivatives require a leaf node");
  const LeafAssignment at = LeafAssignment::at_evidence(network, evidence);
  PassState on = upward_pass(circuit, leaves, at, LeafPin{b, 1.0});
  downward_pass(circuit, on);
  PassState off = upward_pass(circuit, leaves, at, LeafPin{b, 0.0});
  downward_pass(circuit, off);
  std::vector<double> result(circuit.node_count());
  for (NodeId id = 0; id < circuit.node_count(); ++id)
    result[id] = on.partial[id] - off.partial[id];
  result[b] = 0.0;
  return result;
}

double second_derivative(const Circuit& circuit, const LeafMap& leaves, const Network& network,
                         const Evidence& evidence, NodeId a, NodeId b) {
  if (!circuit.is_leaf(a) || !circuit.is_leaf(b))
    throw std::invalid_argument("second derivatives require leaf nodes");
  if (a == b) return 0.0;  // every variable has degree one
  return second_derivatives_for(circuit, leaves, network, evidence, b)[a];
}

double rounding_error_bound(const Circuit& circuit, const PassState& state, double epsilon) {
  if (!state.has_partials)
    throw std::invalid_argument("rounding_error_bound needs a completed downward pass");
  double sum = 0.0;
  for (NodeId id = 0; id < circuit.node_count(); ++id)
    if (!circuit.is_leaf(id)) sum += std::abs(state.partial[id] * state.value[id]);
  return epsilon * sum;
}

}  // namespace dac
