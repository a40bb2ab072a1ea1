#include "dac/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace dac {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

int Evidence::value_of(int variable) const { return assignments_.at(variable); }

Network::Network(std::vector<Variable> variables, std::vector<Family> families)
    : variables_(std::move(variables)), families_(std::move(families)) {
  validate();
}

void Network::validate() const {
  const int n = variable_count();
  if (n == 0) throw ParseError("network needs at least one variable");
  std::unordered_set<std::string> names;
  for (int i = 0; i < n; ++i) {
    const Variable& v = variables_[i];
    if (v.name.empty()) throw ParseError("variable " + std::to_string(i) + " has an empty name");
    if (!names.insert(v.name).second) throw ParseError("duplicate variable name '" + v.name + "'");
    if (v.values.size() < 2)
      throw ParseError("variable '" + v.name + "' needs at least 2 values");
    std::unordered_set<std::string> labels;
    for (const std::string& label : v.values)
      if (!labels.insert(label).second)
        throw ParseError("variable '" + v.name + "' has duplicate value label '" + label + "'");
  }
  if (static_cast<int>(families_.size()) != n)
    throw ParseError("expected one family per variable (" + std::to_string(n) + "), got " +
                     std::to_string(families_.size()));
  for (int i = 0; i < n; ++i) {
    const Family& f = families_[i];
    if (f.child != i)
      throw ParseError("family " + std::to_string(i) + " is not indexed by its child variable");
    std::unordered_set<int> seen;
    for (int p : f.parents) {
      if (p < 0 || p >= n)
        throw ParseError("family of '" + variables_[i].name + "' has an out-of-range parent");
      if (p == i)
        throw ParseError("variable '" + variables_[i].name + "' lists itself as a parent");
      if (!seen.insert(p).second)
        throw ParseError("family of '" + variables_[i].name + "' lists parent '" +
                         variables_[p].name + "' twice");
    }
    std::size_t expected = variables_[i].values.size();
    for (int p : f.parents) expected *= variables_[p].values.size();
    if (f.table.size() != expected)
      throw ParseError("CPT for '" + variables_[i].name + "' has " +
                       std::to_string(f.table.size()) + " entries, expected " +
                       std::to_string(expected));
    for (double t : f.table)
      if (!std::isfinite(t) || t < 0.0 || t > 1.0)
        throw ParseError("CPT for '" + variables_[i].name + "' has an entry outside [0,1]");
  }
  // Parent relation must be acyclic.
  std::vector<int> indegree(n, 0);
  for (const Family& f : families_) indegree[f.child] += static_cast<int>(f.parents.size());
  std::vector<std::vector<int>> children(n);
  for (const Family& f : families_)
    for (int p : f.parents) children[p].push_back(f.child);
  std::queue<int> ready;
  for (int i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  int emitted = 0;
  while (!ready.empty()) {
    int v = ready.front();
    ready.pop();
    ++emitted;
    for (int c : children[v])
      if (--indegree[c] == 0) ready.push(c);
  }
  if (emitted != n) throw ParseError("parent graph contains a cycle");
  // Each column (fixed parent instantiation) sums to 1.
  for (int i = 0; i < n; ++i) {
    const int k = domain_size(i);
    const int cols = parent_inst_count(i);
    for (int u = 0; u < cols; ++u) {
      double sum = 0.0;
      for (int x = 0; x < k; ++x) sum += families_[i].table[u * k + x];
      if (std::abs(sum - 1.0) > kCptSumTolerance) {
        std::vector<int> pv;
        int cv;
        decode_flat(i, u * k, cv, pv);
        std::string where;
        for (std::size_t j = 0; j < pv.size(); ++j) {
          if (j) where += ",";
          const Variable& pvar = variables_[families_[i].parents[j]];
          where += pvar.name + "=" + pvar.values[pv[j]];
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", sum);
        throw ParseError("CPT for '" + variables_[i].name + "', parent instantiation (" + where +
                         "): column sums to " + buf + ", expected 1");
      }
    }
  }
}

int Network::variable_index(const std::string& name) const {
  for (int i = 0; i < variable_count(); ++i)
    if (variables_[i].name == name) return i;
  return -1;
}

int Network::value_index(int variable, const std::string& label) const {
  const Variable& v = variables_.at(variable);
  for (int i = 0; i < static_cast<int>(v.values.size()); ++i)
    if (v.values[i] == label) return i;
  return -1;
}

int Network::parent_inst_count(int family) const {
  int count = 1;
  for (int p : families_.at(family).parents) count *= domain_size(p);
  return count;
}

int Network::flat_index(int family, int child_value, std::span<const int> parent_values) const {
  const Family& f = families_.at(family);
  if (parent_values.size() != f.parents.size())
    throw std::invalid_argument("wrong number of parent values");
  int idx = 0;
  for (std::size_t j = 0; j < f.parents.size(); ++j) idx = idx * domain_size(f.parents[j]) + parent_values[j];
  return idx * domain_size(family) + child_value;
}

int Network::flat_of(int family, int child_value, int parent_inst) const {
  return parent_inst * domain_size(family) + child_value;
}

void Network::decode_flat(int family, int flat, int& child_value,
                          std::vector<int>& parent_values) const {
  const Family& f = families_.at(family);
  child_value = flat % domain_size(family);
  int u = flat / domain_size(family);
  parent_values.assign(f.parents.size(), 0);
  for (int j = static_cast<int>(f.parents.size()) - 1; j >= 0; --j) {
    const int d = domain_size(f.parents[j]);
    parent_values[j] = u % d;
    u /= d;
  }
}

int Network::flat_for_full_instantiation(int family, std::span<const int> full) const {
  const Family& f = families_.at(family);
  int idx = 0;
  for (int p : f.parents) idx = idx * domain_size(p) + full[p];
  return idx * domain_size(family) + full[family];
}

std::string Network::describe_parameter(int family, int flat) const {
  int cv;
  std::vector<int> pv;
  decode_flat(family, flat, cv, pv);
  std::string s = variables_[family].name + "=" + variables_[family].values[cv] + "|";
  for (std::size_t j = 0; j < pv.size(); ++j) {
    if (j) s += ",";
    const Variable& p = variables_[families_[family].parents[j]];
    s += p.name + "=" + p.values[pv[j]];
  }
  return s;
}

int Network::parameter_count() const {
  int total = 0;
  for (const Family& f : families_) total += static_cast<int>(f.table.size());
  return total;
}

Network parse_network(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("network document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("variables") || !doc.contains("cpts"))
    throw ParseError("network document must be an object with 'variables' and 'cpts'");

  std::vector<Variable> variables;
  std::unordered_map<std::string, int> index;
  for (const auto& jv : doc["variables"]) {
    if (!jv.is_object() || !jv.contains("name") || !jv.contains("values") ||
        !jv["name"].is_string() || !jv["values"].is_array())
      throw ParseError("each variable needs a string 'name' and an array 'values'");
    Variable v;
    v.name = jv["name"].get<std::string>();
    for (const auto& jl : jv["values"]) {
      if (!jl.is_string()) throw ParseError("value labels of '" + v.name + "' must be strings");
      v.values.push_back(jl.get<std::string>());
    }
    if (index.count(v.name)) throw ParseError("duplicate variable name '" + v.name + "'");
    index[v.name] = static_cast<int>(variables.size());
    variables.push_back(std::move(v));
  }

  std::vector<Family> families(variables.size());
  std::vector<bool> have(variables.size(), false);
  for (const auto& jc : doc["cpts"]) {
    if (!jc.is_object() || !jc.contains("child") || !jc.contains("parents") ||
        !jc.contains("table") || !jc["child"].is_string() || !jc["parents"].is_array() ||
        !jc["table"].is_array())
      throw ParseError("each cpt needs 'child', 'parents' and 'table'");
    const std::string child = jc["child"].get<std::string>();
    auto it = index.find(child);
    if (it == index.end()) throw ParseError("cpt references unknown variable '" + child + "'");
    if (have[it->second]) throw ParseError("variable '" + child + "' has more than one cpt");
    have[it->second] = true;
    Family f;
    f.child = it->second;
    for (const auto& jp : jc["parents"]) {
      if (!jp.is_string()) throw ParseError("parents of '" + child + "' must be variable names");
      auto pit = index.find(jp.get<std::string>());
      if (pit == index.end())
        throw ParseError("cpt for '" + child + "' references unknown parent '" +
                         jp.get<std::string>() + "'");
      f.parents.push_back(pit->second);
    }
    for (const auto& jt : jc["table"]) {
      if (!jt.is_number())
        throw ParseError("table of '" + child + "' must contain only numbers");
      f.table.push_back(jt.get<double>());
    }
    families[it->second] = std::move(f);
  }
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (!have[i]) throw ParseError("variable '" + variables[i].name + "' has no cpt");

  return Network(std::move(variables), std::move(families));
}

std::string serialize_network(const Network& network) {
  nlohmann::ordered_json doc;
  doc["variables"] = nlohmann::ordered_json::array();
  for (int i = 0; i < network.variable_count(); ++i) {
    const Variable& v = network.variable(i);
    doc["variables"].push_back({{"name", v.name}, {"values", v.values}});
  }
  doc["cpts"] = nlohmann::ordered_json::array();
  for (int i = 0; i < network.variable_count(); ++i) {
    const Family& f = network.family(i);
    nlohmann::ordered_json jc;
    jc["child"] = network.variable(i).name;
    jc["parents"] = nlohmann::ordered_json::array();
    for (int p : f.parents) jc["parents"].push_back(network.variable(p).name);
    jc["table"] = f.table;
    doc["cpts"].push_back(std::move(jc));
  }
  return doc.dump(2);
}

Evidence parse_evidence(const std::string& text, const Network& network) {
  Evidence e;
  if (trim(text).empty()) return e;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw ParseError("evidence item '" + trim(item) + "' is not of the form Var=value");
    const std::string var = trim(item.substr(0, eq));
    const std::string val = trim(item.substr(eq + 1));
    const int vi = network.variable_index(var);
    if (vi < 0) throw ParseError("evidence references unknown variable '" + var + "'");
    const int xi = network.value_index(vi, val);
    if (xi < 0) throw ParseError("'" + val + "' is not a value of variable '" + var + "'");
    if (e.has(vi) && e.value_of(vi) != xi)
      throw ParseError("evidence assigns two different values to '" + var + "'");
    e.set(vi, xi);
  }
  return e;
}

std::string format_evidence(const Evidence& evidence, const Network& network) {
  std::string s;
  for (const auto& [var, val] : evidence.assignments()) {
    if (!s.empty()) s += ",";
    s += network.variable(var).name + "=" + network.variable(var).values[val];
  }
  return s;
}

int indicator_value(const Evidence& evidence, int variable, int value) {
  if (!evidence.has(variable)) return 1;
  return evidence.value_of(variable) == value ? 1 : 0;
}

int indicator_value(const Network& network, const Evidence& evidence,
                    const std::string& variable, const std::string& value) {
  const int vi = network.variable_index(variable);
  if (vi < 0) throw ParseError("unknown variable '" + variable + "'");
  const int xi = network.value_index(vi, value);
  if (xi < 0) throw ParseError("'" + value + "' is not a value of variable '" + variable + "'");
  return indicator_value(evidence, vi, xi);
}

bool consistent(const Evidence& a, const Evidence& b) {
  const Evidence& small = a.size() <= b.size() ? a : b;
  const Evidence& large = a.size() <= b.size() ? b : a;
  for (const auto& [var, val] : small.assignments())
    if (large.has(var) && large.value_of(var) != val) return false;
  return true;
}

LeafAssignment::LeafAssignment(const Network& network) {
  lambda_.resize(network.variable_count());
  theta_.resize(network.variable_count());
  for (int i = 0; i < network.variable_count(); ++i) {
    lambda_[i].assign(network.domain_size(i), 0.0);
    theta_[i].assign(network.table_size(i), 0.0);
  }
}

LeafAssignment LeafAssignment::at_evidence(const Network& network, const Evidence& evidence) {
  LeafAssignment a(network);
  for (int i = 0; i < network.variable_count(); ++i) {
    for (int x = 0; x < network.domain_size(i); ++x)
      a.lambda_[i][x] = indicator_value(evidence, i, x);
    for (int t = 0; t < network.table_size(i); ++t) a.theta_[i][t] = network.theta(i, t);
  }
  return a;
}

double LeafAssignment::get(const LeafRef& ref) const {
  return ref.kind == LeafRef::Kind::Indicator ? indicator(ref.index, ref.value)
                                              : parameter(ref.index, ref.value);
}

void LeafAssignment::set(const LeafRef& ref, double v) {
  if (ref.kind == LeafRef::Kind::Indicator)
    set_indicator(ref.index, ref.value, v);
  else
    set_parameter(ref.index, ref.value, v);
}

}  // namespace dac
