#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dac {

// Input/file problems: malformed documents, invalid networks, bad evidence strings.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A circuit references a variable, value, or parameter the network does not have.
struct BindError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A query's numeric precondition failed (zero-probability evidence, observed target, ...).
struct QueryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Variable {
  std::string name;
  std::vector<std::string> values;  // >= 2, labels unique

  friend bool operator==(const Variable&, const Variable&) = default;
};

// Conditional probability table of one variable given its parents.
// Layout: parents vary in listed order (first parent outermost), child value
// innermost. Entry for (child value x, parent values u) sits at
// flat = (((u0*|D1| + u1)*...)*|child| + x).
struct Family {
  int child = -1;
  std::vector<int> parents;
  std::vector<double> table;

  friend bool operator==(const Family&, const Family&) = default;
};

// Partial instantiation: variable index -> value index. Empty = no evidence.
class Evidence {
 public:
  Evidence() = default;

  void set(int variable, int value) { assignments_[variable] = value; }
  void erase(int variable) { assignments_.erase(variable); }
  bool has(int variable) const { return assignments_.count(variable) != 0; }
  int value_of(int variable) const;  // throws std::out_of_range if unassigned
  bool empty() const { return assignments_.empty(); }
  std::size_t size() const { return assignments_.size(); }
  const std::map<int, int>& assignments() const { return assignments_; }

  friend bool operator==(const Evidence&, const Evidence&) = default;

 private:
  std::map<int, int> assignments_;
};

// Identity of one polynomial variable in a network's leaf space: either the
// evidence indicator of (variable, value) or the parameter at a family's
// flat table index.
struct LeafRef {
  enum class Kind : std::uint8_t { Indicator, Parameter };
  Kind kind = Kind::Indicator;
  int index = -1;  // variable index (Indicator) or family index (Parameter)
  int value = -1;  // value index (Indicator) or flat table index (Parameter)

  static LeafRef indicator(int variable, int value) {
    return {Kind::Indicator, variable, value};
  }
  static LeafRef parameter(int family, int flat) {
    return {Kind::Parameter, family, flat};
  }
  friend bool operator==(const LeafRef&, const LeafRef&) = default;
};

// A discrete Bayesian network together with its quantification. Immutable
// after construction; safe to share across concurrent queries.
class Network {
 public:
  Network(std::vector<Variable> variables, std::vector<Family> families);

  int variable_count() const { return static_cast<int>(variables_.size()); }
  const Variable& variable(int i) const { return variables_.at(i); }
  int domain_size(int i) const { return static_cast<int>(variables_.at(i).values.size()); }

  // families_[i] is the family whose child is variable i.
  const Family& family(int i) const { return families_.at(i); }

  // Name lookups (boundary only; everything else runs on indices).
  int variable_index(const std::string& name) const;          // -1 if unknown
  int value_index(int variable, const std::string& label) const;  // -1 if unknown

  // Table addressing.
  int table_size(int family) const { return static_cast<int>(families_.at(family).table.size()); }
  int parent_inst_count(int family) const;
  int flat_index(int family, int child_value, std::span<const int> parent_values) const;
  // flat = parent_inst * |child domain| + child_value
  int flat_of(int family, int child_value, int parent_inst) const;
  void decode_flat(int family, int flat, int& child_value, std::vector<int>& parent_values) const;
  int flat_for_full_instantiation(int family, std::span<const int> full) const;
  double theta(int family, int flat) const { return families_.at(family).table.at(flat); }

  // Human-readable rendering of a family instantiation, "B=true|A=false,...".
  std::string describe_parameter(int family, int flat) const;

  int parameter_count() const;  // total table entries across families

  friend bool operator==(const Network&, const Network&) = default;

 private:
  void validate() const;

  std::vector<Variable> variables_;
  std::vector<Family> families_;
};

// Tables must renormalize to exactly 1 per parent instantiation; decimal text
// inputs justify the slack.
inline constexpr double kCptSumTolerance = 1e-9;

// Parse/serialize the JSON network document:
//   {"variables":[{"name":"A","values":["true","false"]}],
//    "cpts":[{"child":"A","parents":[],"table":[0.3,0.7]}]}
Network parse_network(const std::string& text);
std::string serialize_network(const Network& network);

// Evidence strings: "Var=value,Var=value"; surrounding whitespace ignored;
// empty string means no evidence.
Evidence parse_evidence(const std::string& text, const Network& network);
std::string format_evidence(const Evidence& evidence, const Network& network);

// e(x): 1 iff x's variable is unassigned or assigned to x's value.
int indicator_value(const Evidence& evidence, int variable, int value);
int indicator_value(const Network& network, const Evidence& evidence,
                    const std::string& variable, const std::string& value);

// True iff no variable is assigned different values by a and b.
bool consistent(const Evidence& a, const Evidence& b);

// One real value per polynomial variable of a network: every indicator and
// every parameter assigned exactly once. Supports evaluation at arbitrary
// (non-0/1) points.
class LeafAssignment {
 public:
  explicit LeafAssignment(const Network& network);  // all zeros

  // lambda = e(x), theta = network quantification.
  static LeafAssignment at_evidence(const Network& network, const Evidence& evidence);

  double indicator(int variable, int value) const { return lambda_.at(variable).at(value); }
  double parameter(int family, int flat) const { return theta_.at(family).at(flat); }
  void set_indicator(int variable, int value, double v) { lambda_.at(variable).at(value) = v; }
  void set_parameter(int family, int flat, double v) { theta_.at(family).at(flat) = v; }

  double get(const LeafRef& ref) const;
  void set(const LeafRef& ref, double v);

 private:
  std::vector<std::vector<double>> lambda_;  // [variable][value]
  std::vector<std::vector<double>> theta_;   // [family][flat]
};

}  // namespace dac
