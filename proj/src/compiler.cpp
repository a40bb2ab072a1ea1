#include "dac/compiler.hpp"

#include <algorithm>
#include <numeric>

namespace dac {

namespace {

// Mixed-radix addressing for a table scope (first variable outermost).
struct ScopeIndexer {
  std::vector<int> vars;
  std::vector<int> radix;
  std::vector<std::int64_t> stride;
  std::int64_t size = 1;

  ScopeIndexer(const Network& net, std::vector<int> scope) : vars(std::move(scope)) {
    radix.reserve(vars.size());
    for (int v : vars) radix.push_back(net.domain_size(v));
    stride.assign(vars.size(), 1);
    for (int i = static_cast<int>(vars.size()) - 2; i >= 0; --i)
      stride[i] = stride[i + 1] * radix[i + 1];
    for (int r : radix) size *= r;
  }

  void decode(std::int64_t index, std::vector<int>& values) const {
    values.resize(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
      values[i] = static_cast<int>(index / stride[i]);
      index %= stride[i];
    }
  }
};

}  // namespace

std::vector<SymbolicTable> parameterize_cpts(CircuitBuilder& builder) {
  const Network& net = builder.network();
  std::vector<SymbolicTable> tables;
  tables.reserve(net.variable_count());
  for (int f = 0; f < net.variable_count(); ++f) {
    SymbolicTable t;
    t.scope = net.family(f).parents;
    t.scope.push_back(f);  // child varies innermost, matching the table layout
    t.entries.reserve(net.table_size(f));
    for (int flat = 0; flat < net.table_size(f); ++flat) {
      int child_value;
      std::vector<int> parent_values;
      net.decode_flat(f, flat, child_value, parent_values);
      t.entries.push_back(
          builder.mul({builder.parameter(f, flat), builder.indicator(f, child_value)}));
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

SymbolicTable multiply_tables(CircuitBuilder& builder, const std::vector<SymbolicTable>& tables) {
  if (tables.empty()) throw std::invalid_argument("multiply_tables needs at least one table");
  if (tables.size() == 1) return tables[0];

  const Network& net = builder.network();
  std::vector<int> scope;
  for (const SymbolicTable& t : tables)
    for (int v : t.scope)
      if (std::find(scope.begin(), scope.end(), v) == scope.end()) scope.push_back(v);
  std::sort(scope.begin(), scope.end());

  ScopeIndexer out(net, scope);
  // Per operand, the stride each union-scope position contributes to its index.
  std::vector<std::vector<std::int64_t>> strides(tables.size(),
                                                 std::vector<std::int64_t>(scope.size(), 0));
  for (std::size_t k = 0; k < tables.size(); ++k) {
    ScopeIndexer op(net, tables[k].scope);
    for (std::size_t i = 0; i < op.vars.size(); ++i) {
      const auto pos = std::find(scope.begin(), scope.end(), op.vars[i]) - scope.begin();
      strides[k][pos] = op.stride[i];
    }
  }

  SymbolicTable result;
  result.scope = scope;
  result.entries.reserve(out.size);
  std::vector<int> values;
  std::vector<NodeId> children(tables.size());
  for (std::int64_t idx = 0; idx < out.size; ++idx) {
    out.decode(idx, values);
    for (std::size_t k = 0; k < tables.size(); ++k) {
      std::int64_t op_idx = 0;
      for (std::size_t p = 0; p < scope.size(); ++p) op_idx += strides[k][p] * values[p];
      children[k] = tables[k].entries[op_idx];
    }
    result.entries.push_back(builder.mul(children));
  }
  return result;
}

SymbolicTable sum_out(CircuitBuilder& builder, const SymbolicTable& table, int variable) {
  const auto pos_it = std::find(table.scope.begin(), table.scope.end(), variable);
  if (pos_it == table.scope.end())
    throw std::invalid_argument("sum_out: variable is not in the table's scope");
  const std::size_t pos = pos_it - table.scope.begin();

  const Network& net = builder.network();
  ScopeIndexer in(net, table.scope);
  SymbolicTable result;
  result.scope = table.scope;
  result.scope.erase(result.scope.begin() + pos);
  ScopeIndexer out(net, result.scope);

  result.entries.reserve(out.size);
  std::vector<int> values;
  std::vector<NodeId> children(net.domain_size(variable));
  for (std::int64_t idx = 0; idx < out.size; ++idx) {
    out.decode(idx, values);
    std::int64_t base = 0;
    for (std::size_t i = 0, j = 0; i < in.vars.size(); ++i) {
      if (i == pos) continue;
      base += in.stride[i] * values[j++];
    }
    for (int x = 0; x < net.domain_size(variable); ++x)
      children[x] = table.entries[base + in.stride[pos] * x];
    result.entries.push_back(builder.add(children));
  }
  return result;
}

Circuit ve_compile(const Network& network, const EliminationOrder& order) {
  const int n = network.variable_count();
  {
    std::vector<char> seen(n, 0);
    for (int v : order.order) {
      if (v < 0 || v >= n || seen[v])
        throw std::invalid_argument("elimination order is not a permutation of the variables");
      seen[v] = 1;
    }
    if (static_cast<int>(order.order.size()) != n)
      throw std::invalid_argument("elimination order must cover every variable");
  }

  CircuitBuilder builder(network);
  std::vector<SymbolicTable> pool = parameterize_cpts(builder);
  std::vector<char> alive(pool.size(), 1);

  for (int x : order.order) {
    std::vector<SymbolicTable> operands;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!alive[i]) continue;
      if (std::find(pool[i].scope.begin(), pool[i].scope.end(), x) != pool[i].scope.end()) {
        operands.push_back(pool[i]);
        alive[i] = 0;
      }
    }
    // The variable's own parameterized CPT keeps it in scope until this step.
    if (operands.empty())
      throw std::logic_error("no table mentions the variable being eliminated");
    SymbolicTable product = multiply_tables(builder, operands);
    pool.push_back(sum_out(builder, product, x));
    alive.push_back(1);
  }

  std::vector<NodeId> scalars;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!alive[i]) continue;
    if (!pool[i].scope.empty()) throw std::logic_error("non-scalar table left after elimination");
    scalars.push_back(pool[i].entries.at(0));
  }
  return builder.finish(builder.mul(scalars));
}

namespace {

// Undirected moral graph as an adjacency matrix.
std::vector<std::vector<char>> moral_graph(const Network& net) {
  const int n = net.variable_count();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  auto connect = [&](int a, int b) {
    if (a != b) adj[a][b] = adj[b][a] = 1;
  };
  for (int i = 0; i < n; ++i) {
    const auto& parents = net.family(i).parents;
    for (std::size_t a = 0; a < parents.size(); ++a) {
      connect(i, parents[a]);
      for (std::size_t b = a + 1; b < parents.size(); ++b) connect(parents[a], parents[b]);
    }
  }
  return adj;
}

int eliminate_vertex(std::vector<std::vector<char>>& adj, std::vector<char>& alive, int v) {
  std::vector<int> nbrs;
  for (std::size_t u = 0; u < adj.size(); ++u)
    if (alive[u] && adj[v][u]) nbrs.push_back(static_cast<int>(u));
  for (std::size_t a = 0; a < nbrs.size(); ++a)
    for (std::size_t b = a + 1; b < nbrs.size(); ++b) adj[nbrs[a]][nbrs[b]] = adj[nbrs[b]][nbrs[a]] = 1;
  alive[v] = 0;
  return static_cast<int>(nbrs.size());
}

}  // namespace

EliminationOrder min_fill_order(const Network& network) {
  const int n = network.variable_count();
  auto adj = moral_graph(network);
  std::vector<char> alive(n, 1);
  EliminationOrder result;
  result.order.reserve(n);

  for (int step = 0; step < n; ++step) {
    int best = -1;
    long best_fill = -1;
    for (int v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      std::vector<int> nbrs;
      for (int u = 0; u < n; ++u)
        if (alive[u] && adj[v][u]) nbrs.push_back(u);
      long fill = 0;
      for (std::size_t a = 0; a < nbrs.size(); ++a)
        for (std::size_t b = a + 1; b < nbrs.size(); ++b)
          if (!adj[nbrs[a]][nbrs[b]]) ++fill;
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    result.width = std::max(result.width, eliminate_vertex(adj, alive, best));
    result.order.push_back(best);
  }
  return result;
}

int order_width(const Network& network, const std::vector<int>& order) {
  const int n = network.variable_count();
  std::vector<char> seen(n, 0);
  for (int v : order) {
    if (v < 0 || v >= n || seen[v])
      throw std::invalid_argument("order is not a permutation of the variables");
    seen[v] = 1;
  }
  if (static_cast<int>(order.size()) != n)
    throw std::invalid_argument("order must cover every variable");

  auto adj = moral_graph(network);
  std::vector<char> alive(n, 1);
  int width = 0;
  for (int v : order) width = std::max(width, eliminate_vertex(adj, alive, v));
  return width;
}

}  // namespace dac
