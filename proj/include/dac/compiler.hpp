#pragma once

#include <vector>

#include "dac/circuit.hpp"
#include "dac/model.hpp"

namespace dac {

// A table over a variable scope whose entries are circuit nodes instead of
// numbers. Entry order follows the scope: first variable outermost, last
// innermost.
struct SymbolicTable {
  std::vector<int> scope;        // variable indices
  std::vector<NodeId> entries;   // one per instantiation of scope
};

struct EliminationOrder {
  std::vector<int> order;  // permutation of all variable indices
  int width = 0;           // largest induced cluster size minus one
};

// One table per family: the entry at instantiation (x,u) is the product of
// the parameter leaf for (x,u) and the indicator leaf for x. Leaves are
// created on demand and deduplicated through the builder.
std::vector<SymbolicTable> parameterize_cpts(CircuitBuilder& builder);

// Scope = union of the operand scopes (ascending variable index); each entry
// multiplies the operands' entries at the matching instantiations. A single
// operand is returned unchanged.
SymbolicTable multiply_tables(CircuitBuilder& builder, const std::vector<SymbolicTable>& tables);

// Removes `variable` from the scope; each entry adds the |domain| entries
// that agree on the remaining scope.
SymbolicTable sum_out(CircuitBuilder& builder, const SymbolicTable& table, int variable);

// Compile the network into a circuit by eliminating variables in the given
// order: parameterize every CPT, then per variable multiply all tables still
// containing it and sum it out of the product. Disconnected components each
// end in a scalar table; the root multiplies those scalars.
Circuit ve_compile(const Network& network, const EliminationOrder& order);

// Greedy minimum-fill ordering over the moral graph; ties break toward the
// smallest variable index.
EliminationOrder min_fill_order(const Network& network);

// Width of a user-supplied order: simulate elimination on the moral graph and
// report the largest neighborhood encountered.
int order_width(const Network& network, const std::vector<int>& order);

// Compiled size stays below kCompileSizeConstant * n * 2^(width+1) for
// binary networks (see the size-bound tests).
inline constexpr int kCompileSizeConstant = 5;

}  // namespace dac
