#include "dac/circuit.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace dac {

const IndicatorLabel& Circuit::indicator_label(NodeId id) const {
  const CircuitNode& n = nodes_.at(id);
  if (n.kind != NodeKind::Indicator) throw std::invalid_argument("node is not an indicator leaf");
  return indicator_labels_.at(n.label);
}

const ParameterLabel& Circuit::parameter_label(NodeId id) const {
  const CircuitNode& n = nodes_.at(id);
  if (n.kind != NodeKind::Parameter) throw std::invalid_argument("node is not a parameter leaf");
  return parameter_labels_.at(n.label);
}

std::int64_t Circuit::edge_count() const {
  std::int64_t edges = 0;
  for (const CircuitNode& n : nodes_) edges += static_cast<std::int64_t>(n.children.size());
  return edges;
}

int Circuit::count_of(NodeKind kind) const {
  return static_cast<int>(
      std::count_if(nodes_.begin(), nodes_.end(),
                    [kind](const CircuitNode& n) { return n.kind == kind; }));
}

int Circuit::max_arity() const {
  std::size_t m = 0;
  for (const CircuitNode& n : nodes_) m = std::max(m, n.children.size());
  return static_cast<int>(m);
}

CircuitBuilder::CircuitBuilder(const Network& network) : network_(network) {
  indicator_ids_.resize(network.variable_count());
  parameter_ids_.resize(network.variable_count());
  for (int i = 0; i < network.variable_count(); ++i) {
    indicator_ids_[i].assign(network.domain_size(i), -1);
    parameter_ids_[i].assign(network.table_size(i), -1);
  }
}

NodeId CircuitBuilder::indicator(int variable, int value) {
  NodeId& slot = indicator_ids_.at(variable).at(value);
  if (slot >= 0) return slot;
  slot = static_cast<NodeId>(circuit_.nodes_.size());
  CircuitNode n;
  n.kind = NodeKind::Indicator;
  n.label = static_cast<std::int32_t>(circuit_.indicator_labels_.size());
  circuit_.indicator_labels_.push_back(
      {network_.variable(variable).name, network_.variable(variable).values.at(value)});
  circuit_.nodes_.push_back(std::move(n));
  return slot;
}

NodeId CircuitBuilder::parameter(int family, int flat) {
  NodeId& slot = parameter_ids_.at(family).at(flat);
  if (slot >= 0) return slot;
  slot = static_cast<NodeId>(circuit_.nodes_.size());
  int child_value;
  std::vector<int> parent_values;
  network_.decode_flat(family, flat, child_value, parent_values);
  ParameterLabel label;
  label.child = network_.variable(family).name;
  label.child_value = network_.variable(family).values.at(child_value);
  const Family& f = network_.family(family);
  for (std::size_t j = 0; j < f.parents.size(); ++j) {
    label.parents.push_back(network_.variable(f.parents[j]).name);
    label.parent_values.push_back(network_.variable(f.parents[j]).values.at(parent_values[j]));
  }
  CircuitNode n;
  n.kind = NodeKind::Parameter;
  n.label = static_cast<std::int32_t>(circuit_.parameter_labels_.size());
  circuit_.parameter_labels_.push_back(std::move(label));
  circuit_.nodes_.push_back(std::move(n));
  return slot;
}

NodeId CircuitBuilder::add(std::vector<NodeId> children) {
  if (children.empty()) throw std::invalid_argument("add node needs at least one child");
  if (children.size() == 1) return children[0];
  const NodeId id = static_cast<NodeId>(circuit_.nodes_.size());
  for (NodeId c : children)
    if (c < 0 || c >= id) throw std::invalid_argument("add child must be an existing node");
  CircuitNode n;
  n.kind = NodeKind::Add;
  n.children = std::move(children);
  circuit_.nodes_.push_back(std::move(n));
  return id;
}

NodeId CircuitBuilder::mul(std::vector<NodeId> children) {
  if (children.empty()) throw std::invalid_argument("mul node needs at least one child");
  if (children.size() == 1) return children[0];
  const NodeId id = static_cast<NodeId>(circuit_.nodes_.size());
  for (NodeId c : children)
    if (c < 0 || c >= id) throw std::invalid_argument("mul child must be an existing node");
  CircuitNode n;
  n.kind = NodeKind::Mul;
  n.children = std::move(children);
  circuit_.nodes_.push_back(std::move(n));
  return id;
}

Circuit CircuitBuilder::finish(NodeId root) {
  if (root < 0 || root >= node_count()) throw std::invalid_argument("root is not a node");
  circuit_.root_ = root;
  return std::move(circuit_);
}

namespace {

const char* kMagic = "dac 1";

void check_name(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("circuit text format cannot carry empty names");
  for (char c : s)
    if (c == '=' || c == ',' || c == '|' || c == ' ' || c == '\t' || c == '\n' || c == '\r')
      throw std::invalid_argument("circuit text format cannot carry name '" + s +
                                  "' (contains a delimiter character)");
}

struct LineReader {
  std::istringstream in;
  int number = 0;
  explicit LineReader(const std::string& text) : in(text) {}
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("circuit line " + std::to_string(number) + ": " + what);
  }
};

int parse_int(LineReader& r, const std::string& tok) {
  int v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) r.fail("expected an integer, got '" + tok + "'");
  return v;
}

// "Var=value", splitting on the first '='.
std::pair<std::string, std::string> parse_pair(LineReader& r, const std::string& tok) {
  const std::size_t eq = tok.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= tok.size())
    r.fail("expected Var=value, got '" + tok + "'");
  return {tok.substr(0, eq), tok.substr(eq + 1)};
}

}  // namespace

std::string serialize_circuit(const Circuit& circuit) {
  if (circuit.node_count() == 0 || circuit.root() < 0)
    throw std::invalid_argument("cannot serialize an empty circuit");
  std::string out;
  out += kMagic;
  out += "\nn " + std::to_string(circuit.node_count()) + "\n";
  for (NodeId i = 0; i < circuit.node_count(); ++i) {
    const CircuitNode& n = circuit.node(i);
    switch (n.kind) {
      case NodeKind::Indicator: {
        const IndicatorLabel& l = circuit.indicator_label(i);
        check_name(l.variable);
        check_name(l.value);
        out += "l " + l.variable + "=" + l.value + "\n";
        break;
      }
      case NodeKind::Parameter: {
        const ParameterLabel& l = circuit.parameter_label(i);
        check_name(l.child);
        check_name(l.child_value);
        out += "p " + l.child + "=" + l.child_value + "|";
        for (std::size_t j = 0; j < l.parents.size(); ++j) {
          check_name(l.parents[j]);
          check_name(l.parent_values[j]);
          if (j) out += ",";
          out += l.parents[j] + "=" + l.parent_values[j];
        }
        out += "\n";
        break;
      }
      case NodeKind::Add:
      case NodeKind::Mul: {
        out += n.kind == NodeKind::Add ? "+" : "*";
        out += " " + std::to_string(n.children.size());
        for (NodeId c : n.children) out += " " + std::to_string(c);
        out += "\n";
        break;
      }
    }
  }
  out += "r " + std::to_string(circuit.root()) + "\n";
  return out;
}

Circuit deserialize_circuit(const std::string& text) {
  LineReader r(text);
  std::string line;
  if (!r.next(line) || line != kMagic)
    throw ParseError("circuit file must start with '" + std::string(kMagic) + "'");
  if (!r.next(line) || line.rfind("n ", 0) != 0) r.fail("expected node-count line 'n <count>'");
  const int declared = parse_int(r, line.substr(2));
  if (declared <= 0) r.fail("circuit must have at least one node");

  Circuit c;
  c.nodes_.reserve(declared);
  while (static_cast<int>(c.nodes_.size()) < declared) {
    if (!r.next(line)) r.fail("file ends before all declared nodes");
    if (line.empty()) r.fail("unexpected blank line");
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    const NodeId id = static_cast<NodeId>(c.nodes_.size());
    CircuitNode n;
    if (tag == "l") {
      std::string tok;
      if (!(ls >> tok)) r.fail("indicator line needs Var=value");
      auto [var, val] = parse_pair(r, tok);
      n.kind = NodeKind::Indicator;
      n.label = static_cast<std::int32_t>(c.indicator_labels_.size());
      c.indicator_labels_.push_back({std::move(var), std::move(val)});
    } else if (tag == "p") {
      std::string tok;
      if (!(ls >> tok)) r.fail("parameter line needs Child=value|parents");
      const std::size_t bar = tok.find('|');
      if (bar == std::string::npos) r.fail("parameter line is missing '|'");
      auto [child, cval] = parse_pair(r, tok.substr(0, bar));
      ParameterLabel label;
      label.child = std::move(child);
      label.child_value = std::move(cval);
      std::string rest = tok.substr(bar + 1);
      if (!rest.empty()) {
        std::stringstream ps(rest);
        std::string item;
        while (std::getline(ps, item, ',')) {
          auto [pn, pv] = parse_pair(r, item);
          label.parents.push_back(std::move(pn));
          label.parent_values.push_back(std::move(pv));
        }
      }
      n.kind = NodeKind::Parameter;
      n.label = static_cast<std::int32_t>(c.parameter_labels_.size());
      c.parameter_labels_.push_back(std::move(label));
    } else if (tag == "+" || tag == "*") {
      n.kind = tag == "+" ? NodeKind::Add : NodeKind::Mul;
      std::string tok;
      if (!(ls >> tok)) r.fail("node line needs a child count");
      const int k = parse_int(r, tok);
      if (k < 1) r.fail("node needs at least one child");
      for (int j = 0; j < k; ++j) {
        if (!(ls >> tok)) r.fail("fewer children than declared");
        const int child = parse_int(r, tok);
        if (child < 0 || child >= id)
          r.fail("child " + std::to_string(child) + " is a forward reference from node " +
                 std::to_string(id));
        n.children.push_back(child);
      }
      if (ls >> tok) r.fail("more children than declared");
    } else {
      r.fail("unknown node tag '" + tag + "'");
    }
    c.nodes_.push_back(std::move(n));
  }

  if (!r.next(line) || line.rfind("r ", 0) != 0) r.fail("expected root line 'r <index>' after the nodes");
  const int root = parse_int(r, line.substr(2));
  if (root < 0 || root >= declared) r.fail("root index " + std::to_string(root) + " is dangling");
  c.root_ = root;
  if (r.next(line)) {
    if (!line.empty()) r.fail("trailing content after the root line");
    while (r.next(line))
      if (!line.empty()) r.fail("trailing content after the root line");
  }
  return c;
}

}  // namespace dac
