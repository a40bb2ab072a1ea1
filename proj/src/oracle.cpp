#include "dac/oracle.hpp"

#include <stdexcept>

namespace dac::oracle {

namespace {

void check_size(const Network& net) {
  if (net.variable_count() > kMaxVariables)
    throw std::invalid_argument("oracle size guard: network exceeds " +
                                std::to_string(kMaxVariables) + " variables");
}

// Calls fn(full) for every full instantiation, first variable outermost.
template <typename Fn>
void for_each_instantiation(const Network& net, Fn&& fn) {
  const int n = net.variable_count();
  std::vector<int> full(n, 0);
  while (true) {
    fn(full);
    int i = n - 1;
    while (i >= 0 && ++full[i] == net.domain_size(i)) full[i--] = 0;
    if (i < 0) break;
  }
}

bool matches_family(const Network& net, int family, int flat, const std::vector<int>& full) {
  return net.flat_for_full_instantiation(family, full) == flat;
}

}  // namespace

std::vector<double> joint_table(const Network& network) {
  check_size(network);
  std::vector<double> table;
  for_each_instantiation(network, [&](const std::vector<int>& full) {
    double p = 1.0;
    for (int f = 0; f < network.variable_count(); ++f)
      p *= network.theta(f, network.flat_for_full_instantiation(f, full));
    table.push_back(p);
  });
  return table;
}

double canonical_eval(const Network& network, const LeafAssignment& assignment) {
  check_size(network);
  double sum = 0.0;
  for_each_instantiation(network, [&](const std::vector<int>& full) {
    double term = 1.0;
    for (int f = 0; f < network.variable_count(); ++f)
      term *= assignment.parameter(f, network.flat_for_full_instantiation(f, full));
    for (int v = 0; v < network.variable_count(); ++v)
      term *= assignment.indicator(v, full[v]);
    sum += term;
  });
  return sum;
}

double prob(const Network& network, const Evidence& event) {
  check_size(network);
  for (const auto& [var, val] : event.assignments())
    if (var < 0 || var >= network.variable_count() || val < 0 || val >= network.domain_size(var))
      throw std::invalid_argument("event references an unknown variable or value");
  double sum = 0.0;
  for_each_instantiation(network, [&](const std::vector<int>& full) {
    for (const auto& [var, val] : event.assignments())
      if (full[var] != val) return;
    double p = 1.0;
    for (int f = 0; f < network.variable_count(); ++f)
      p *= network.theta(f, network.flat_for_full_instantiation(f, full));
    sum += p;
  });
  return sum;
}

double derivative(const Network& network, const Evidence& evidence, const LeafRef& leaf) {
  check_size(network);
  double sum = 0.0;
  for_each_instantiation(network, [&](const std::vector<int>& full) {
    double term = 1.0;
    if (leaf.kind == LeafRef::Kind::Indicator) {
      if (full[leaf.index] != leaf.value) return;
      for (int f = 0; f < network.variable_count(); ++f)
        term *= network.theta(f, network.flat_for_full_instantiation(f, full));
      for (int v = 0; v < network.variable_count(); ++v)
        if (v != leaf.index) term *= indicator_value(evidence, v, full[v]);
    } else {
      if (!matches_family(network, leaf.index, leaf.value, full)) return;
      for (int f = 0; f < network.variable_count(); ++f)
        if (f != leaf.index) term *= network.theta(f, network.flat_for_full_instantiation(f, full));
      for (int v = 0; v < network.variable_count(); ++v)
        term *= indicator_value(evidence, v, full[v]);
    }
    sum += term;
  });
  return sum;
}

double second_derivative(const Network& network, const Evidence& evidence, const LeafRef& a,
                         const LeafRef& b) {
  check_size(network);
  // Monomials are multilinear and never pair two indicators of one variable
  // or two parameters of one family.
  if (a.kind == b.kind && a.index == b.index) return 0.0;

  double sum = 0.0;
  for_each_instantiation(network, [&](const std::vector<int>& full) {
    double term = 1.0;
    for (const LeafRef* leaf : {&a, &b}) {
      if (leaf->kind == LeafRef::Kind::Indicator) {
        if (full[leaf->index] != leaf->value) return;
      } else {
        if (!matches_family(network, leaf->index, leaf->value, full)) return;
      }
    }
    for (int f = 0; f < network.variable_count(); ++f) {
      if (a.kind == LeafRef::Kind::Parameter && a.index == f) continue;
      if (b.kind == LeafRef::Kind::Parameter && b.index == f) continue;
      term *= network.theta(f, network.flat_for_full_instantiation(f, full));
    }
    for (int v = 0; v < network.variable_count(); ++v) {
      if (a.kind == LeafRef::Kind::Indicator && a.index == v) continue;
      if (b.kind == LeafRef::Kind::Indicator && b.index == v) continue;
      term *= indicator_value(evidence, v, full[v]);
    }
    sum += term;
  });
  return sum;
}

}  // namespace dac::oracle
