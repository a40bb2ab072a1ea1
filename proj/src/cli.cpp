#include "dac/cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "dac/compiler.hpp"
#include "dac/engine.hpp"
#include "dac/model.hpp"
#include "dac/oracle.hpp"
#include "dac/queries.hpp"

namespace dac {

namespace {

std::string fmt(double v, int digits = 12) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Usage : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// "Y=v" -> (variable index, value index)
std::pair<int, int> parse_value_pair(const Network& net, const std::string& s) {
  const std::size_t eq = s.find('=');
  if (eq == std::string::npos) throw Usage("'" + s + "' is not of the form Var=value");
  const std::string var = s.substr(0, eq);
  const std::string val = s.substr(eq + 1);
  const int vi = net.variable_index(var);
  if (vi < 0) throw ParseError("unknown variable '" + var + "'");
  const int xi = net.value_index(vi, val);
  if (xi < 0) throw ParseError("'" + val + "' is not a value of variable '" + var + "'");
  return {vi, xi};
}

// Parameter selectors: "X|u" picks the whole co-varying block, "X=x|u" one
// entry; u is "P1=v1,P2=v2" over exactly the family's parents (empty for
// root families, trailing '|' optional).
struct ParamSelector {
  int family = -1;
  std::optional<int> child_value;
  int parent_inst = 0;
};

ParamSelector parse_param_selector(const Network& net, const std::string& s) {
  ParamSelector sel;
  const std::size_t bar = s.find('|');
  const std::string left = bar == std::string::npos ? s : s.substr(0, bar);
  const std::string right = bar == std::string::npos ? "" : s.substr(bar + 1);

  std::string var = left;
  if (const std::size_t eq = left.find('='); eq != std::string::npos) {
    var = left.substr(0, eq);
    sel.family = net.variable_index(var);
    if (sel.family < 0) throw ParseError("unknown variable '" + var + "'");
    const std::string val = left.substr(eq + 1);
    const int xi = net.value_index(sel.family, val);
    if (xi < 0) throw ParseError("'" + val + "' is not a value of variable '" + var + "'");
    sel.child_value = xi;
  } else {
    sel.family = net.variable_index(var);
    if (sel.family < 0) throw ParseError("unknown variable '" + var + "'");
  }

  const Family& f = net.family(sel.family);
  std::vector<int> parent_values(f.parents.size(), -1);
  if (!right.empty()) {
    std::stringstream ss(right);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto [pvar, pval] = parse_value_pair(net, item);
      int slot = -1;
      for (std::size_t j = 0; j < f.parents.size(); ++j)
        if (f.parents[j] == pvar) slot = static_cast<int>(j);
      if (slot < 0)
        throw ParseError("'" + net.variable(pvar).name + "' is not a parent of '" + var + "'");
      if (parent_values[slot] >= 0)
        throw ParseError("parent '" + net.variable(pvar).name + "' given twice");
      parent_values[slot] = pval;
    }
  }
  for (std::size_t j = 0; j < f.parents.size(); ++j)
    if (parent_values[j] < 0)
      throw ParseError("selector must assign parent '" + net.variable(f.parents[j]).name + "'");
  sel.parent_inst = 0;
  for (std::size_t j = 0; j < f.parents.size(); ++j)
    sel.parent_inst = sel.parent_inst * net.domain_size(f.parents[j]) + parent_values[j];
  return sel;
}

// "B=true,A=false" rendering of a family instantiation, child first.
std::string family_inst_key(const Network& net, int family, int flat) {
  int cv;
  std::vector<int> pv;
  net.decode_flat(family, flat, cv, pv);
  std::string s = net.variable(family).name + "=" + net.variable(family).values[cv];
  for (std::size_t j = 0; j < pv.size(); ++j) {
    const int p = net.family(family).parents[j];
    s += "," + net.variable(p).name + "=" + net.variable(p).values[pv[j]];
  }
  return s;
}

int cmd_compile(const std::string& input, const std::string& output, const std::string& order_csv,
                std::ostream& err) {
  const Network net = parse_network(read_file(input));
  EliminationOrder order;
  if (order_csv.empty()) {
    order = min_fill_order(net);
  } else {
    std::stringstream ss(order_csv);
    std::string name;
    while (std::getline(ss, name, ',')) {
      const int v = net.variable_index(name);
      if (v < 0) throw Usage("--order references unknown variable '" + name + "'");
      order.order.push_back(v);
    }
    if (static_cast<int>(order.order.size()) != net.variable_count())
      throw Usage("--order must list every variable exactly once");
    order.width = order_width(net, order.order);
  }
  const Circuit circuit = ve_compile(net, order);
  std::ofstream outf(output, std::ios::binary);
  if (!outf) throw ParseError("cannot write '" + output + "'");
  outf << serialize_circuit(circuit);
  err << "nodes\t" << circuit.node_count() << "\n";
  err << "edges\t" << circuit.edge_count() << "\n";
  err << "width\t" << order.width << "\n";
  return 0;
}

struct QueryFlags {
  bool prob = false;
  bool marginals = false;
  bool families = false;
  std::vector<std::string> retract;
  std::vector<std::string> what_if;
};

int cmd_query(const std::string& circuit_path, const std::string& network_path,
              const std::string& evidence_str, const QueryFlags& flags, std::ostream& out) {
  const Network net = parse_network(read_file(network_path));
  const Circuit circuit = deserialize_circuit(read_file(circuit_path));
  const Evidence evidence = parse_evidence(evidence_str, net);
  const QuerySession session(net, circuit, evidence);
  const bool positive = session.prob_evidence() > 0.0;
  bool suppressed = false;

  if (flags.prob) out << "P(e)\t" << fmt(session.prob_evidence()) << "\n";

  if (flags.marginals) {
    if (!positive) {
      suppressed = true;
    } else {
      for (int v = 0; v < net.variable_count(); ++v) {
        const std::vector<double> post = session.posterior_marginal(v);
        for (int x = 0; x < net.domain_size(v); ++x)
          out << "P(" << net.variable(v).name << "=" << net.variable(v).values[x] << "|e)\t"
              << fmt(post[x]) << "\n";
      }
    }
  }

  if (flags.families) {
    if (!positive) {
      suppressed = true;
    } else {
      for (int f = 0; f < net.variable_count(); ++f)
        for (int t = 0; t < net.table_size(f); ++t)
          out << "P(" << family_inst_key(net, f, t) << "|e)\t" << fmt(session.family_marginal(f, t))
              << "\n";
    }
  }

  for (const std::string& name : flags.retract) {
    const int v = net.variable_index(name);
    if (v < 0) throw ParseError("unknown variable '" + name + "'");
    double retracted = 0.0;
    for (int x = 0; x < net.domain_size(v); ++x) retracted += session.what_if(v, x);
    out << "P(e-" << name << ")\t" << fmt(retracted) << "\n";
    if (retracted > 0.0) {
      const auto r = session.retraction(v);
      for (int x = 0; x < net.domain_size(v); ++x)
        out << "P(" << name << "=" << net.variable(v).values[x] << "|e-" << name << ")\t"
            << fmt(r.posterior[x]) << "\n";
    } else {
      suppressed = true;
    }
  }

  for (const std::string& probe : flags.what_if) {
    auto [v, x] = parse_value_pair(net, probe);
    out << "P(" << net.variable(v).name << "=" << net.variable(v).values[x] << ",e-"
        << net.variable(v).name << ")\t" << fmt(session.what_if(v, x)) << "\n";
  }

  return suppressed ? 3 : 0;
}

struct SensitivityFlags {
  std::string target;
  std::string param;
  bool all_params = false;
  bool all_targets = false;
};

int cmd_sensitivity(const std::string& circuit_path, const std::string& network_path,
                    const std::string& evidence_str, const SensitivityFlags& flags,
                    std::ostream& out) {
  if (flags.all_params == !flags.param.empty())
    throw Usage("give exactly one of --param or --all-params");
  if (flags.all_targets && !flags.target.empty())
    throw Usage("--all-targets and --target are mutually exclusive");
  if (!flags.all_targets && flags.target.empty()) throw Usage("--target Y=v is required");
  if (flags.all_targets && flags.all_params)
    throw Usage("--all-targets needs a --param selector");

  const Network net = parse_network(read_file(network_path));
  const Circuit circuit = deserialize_circuit(read_file(circuit_path));
  const Evidence evidence = parse_evidence(evidence_str, net);
  const QuerySession session(net, circuit, evidence);

  std::vector<std::pair<int, int>> targets;
  if (flags.all_targets) {
    for (int v = 0; v < net.variable_count(); ++v) {
      if (evidence.has(v)) continue;
      for (int x = 0; x < net.domain_size(v); ++x) targets.emplace_back(v, x);
    }
  } else {
    auto [v, x] = parse_value_pair(net, flags.target);
    if (evidence.has(v)) throw QueryError("target variable '" + net.variable(v).name + "' is observed");
    targets.emplace_back(v, x);
  }

  for (auto [yv, yx] : targets) {
    const std::string target_key = net.variable(yv).name + "=" + net.variable(yv).values[yx];
    auto emit = [&](int family, int flat, double value) {
      out << "dP(" << target_key << "|e)/dtheta(" << net.describe_parameter(family, flat) << ")\t"
          << fmt(value) << "\n";
    };
    if (flags.all_params) {
      for (int f = 0; f < net.variable_count(); ++f)
        for (int u = 0; u < net.parent_inst_count(f); ++u) {
          const std::vector<double> block = session.sensitivity_block(yv, yx, f, u);
          for (int x = 0; x < net.domain_size(f); ++x) emit(f, net.flat_of(f, x, u), block[x]);
        }
    } else {
      const ParamSelector sel = parse_param_selector(net, flags.param);
      if (sel.child_value) {
        const int flat = net.flat_of(sel.family, *sel.child_value, sel.parent_inst);
        emit(sel.family, flat, session.sensitivity_theta(yv, yx, sel.family, flat));
      } else {
        const std::vector<double> block =
            session.sensitivity_block(yv, yx, sel.family, sel.parent_inst);
        for (int x = 0; x < net.domain_size(sel.family); ++x)
          emit(sel.family, net.flat_of(sel.family, x, sel.parent_inst), block[x]);
      }
    }
  }
  return 0;
}

Network with_tweaked_theta(const Network& net, int family, int sel_flat, int alt_flat,
                           double theta_prime) {
  std::vector<Variable> vars;
  std::vector<Family> fams;
  for (int i = 0; i < net.variable_count(); ++i) {
    vars.push_back(net.variable(i));
    fams.push_back(net.family(i));
  }
  fams[family].table[sel_flat] = theta_prime;
  fams[family].table[alt_flat] = 1.0 - theta_prime;
  return Network(std::move(vars), std::move(fams));
}

int cmd_tweak(const std::string& circuit_path, const std::string& network_path,
              const std::string& evidence_str, const std::string& target,
              const std::string& param, bool verify, std::ostream& out, std::ostream& err) {
  const Network net = parse_network(read_file(network_path));
  const Circuit circuit = deserialize_circuit(read_file(circuit_path));
  const Evidence evidence = parse_evidence(evidence_str, net);
  const QuerySession session(net, circuit, evidence);

  auto [yv, yx] = parse_value_pair(net, target);
  const ParamSelector sel = parse_param_selector(net, param);
  if (!sel.child_value) throw Usage("tweak needs --param X=x|u (the entry to change)");

  const TweakResult result =
      session.tweak_binary(yv, yx, sel.family, *sel.child_value, sel.parent_inst);
  if (result.status == TweakResult::Status::Infeasible) {
    out << "INFEASIBLE\n";
    err << "no theta in [0,1] achieves the ranking (solved bound: " << fmt(result.required_theta)
        << ")\n";
    return 0;
  }
  out << "delta_min\t" << fmt(result.delta, 5) << "\n";
  out << "theta_prime_min\t" << fmt(result.theta_prime, 5) << "\n";

  if (verify) {
    if (net.variable_count() > oracle::kMaxVariables) {
      err << "network too large for oracle verification\n";
      return 0;
    }
    const int sel_flat = net.flat_of(sel.family, *sel.child_value, sel.parent_inst);
    const int alt_flat = net.flat_of(sel.family, 1 - *sel.child_value, sel.parent_inst);
    const Network tweaked =
        with_tweaked_theta(net, sel.family, sel_flat, alt_flat, result.theta_prime);
    Evidence ev_y = evidence, ev_ybar = evidence;
    ev_y.set(yv, yx);
    ev_ybar.set(yv, 1 - yx);
    const double pe = oracle::prob(tweaked, evidence);
    if (!(pe > 0.0)) throw QueryError("evidence has zero probability under the tweaked network");
    const std::string yname = net.variable(yv).name;
    out << "verify_P(" << yname << "=" << net.variable(yv).values[yx] << "|e)\t"
        << fmt(oracle::prob(tweaked, ev_y) / pe) << "\n";
    out << "verify_P(" << yname << "=" << net.variable(yv).values[1 - yx] << "|e)\t"
        << fmt(oracle::prob(tweaked, ev_ybar) / pe) << "\n";
  }
  return 0;
}

int cmd_stats(const std::string& circuit_path, const std::string& network_path,
              std::ostream& out) {
  const Circuit circuit = deserialize_circuit(read_file(circuit_path));
  out << "nodes\t" << circuit.node_count() << "\n";
  out << "edges\t" << circuit.edge_count() << "\n";
  out << "indicator_leaves\t" << circuit.count_of(NodeKind::Indicator) << "\n";
  out << "parameter_leaves\t" << circuit.count_of(NodeKind::Parameter) << "\n";
  out << "add_nodes\t" << circuit.count_of(NodeKind::Add) << "\n";
  out << "mul_nodes\t" << circuit.count_of(NodeKind::Mul) << "\n";
  out << "root\t" << circuit.root() << "\n";
  if (!network_path.empty()) {
    const Network net = parse_network(read_file(network_path));
    LeafMap binding(circuit, net);  // throws if the circuit does not fit the network
    out << "variables\t" << net.variable_count() << "\n";
    out << "parameters\t" << net.parameter_count() << "\n";
    out << "minfill_width\t" << min_fill_order(net).width << "\n";
    out << "binds\tok\n";
  }
  return 0;
}

int cmd_oracle(const std::string& network_path, const std::string& evidence_str, bool prob,
               bool marginals, std::ostream& out) {
  const Network net = parse_network(read_file(network_path));
  const Evidence evidence = parse_evidence(evidence_str, net);
  const double pe = oracle::prob(net, evidence);
  if (prob) out << "P(e)\t" << fmt(pe) << "\n";
  if (marginals) {
    if (!(pe > 0.0)) return 3;
    for (int v = 0; v < net.variable_count(); ++v)
      for (int x = 0; x < net.domain_size(v); ++x) {
        Evidence ev = evidence;
        ev.set(v, x);
        const double joint = evidence.has(v) && evidence.value_of(v) != x
                                 ? 0.0
                                 : oracle::prob(net, ev);
        out << "P(" << net.variable(v).name << "=" << net.variable(v).values[x] << "|e)\t"
            << fmt(joint / pe) << "\n";
      }
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"arithmetic-circuit inference for discrete Bayesian networks", "dac"};
  app.require_subcommand(1);

  std::string input, output, order_csv;
  CLI::App* compile = app.add_subcommand("compile", "compile a network into a circuit file");
  compile->add_option("-i,--input", input, "network JSON file")->required();
  compile->add_option("-o,--output", output, "circuit file to write")->required();
  compile->add_option("--order", order_csv, "elimination order as Var,Var,... (default: min-fill)");

  std::string circuit_path, network_path, evidence_str;
  QueryFlags qf;
  CLI::App* query = app.add_subcommand("query", "evaluate and differentiate under evidence");
  query->add_option("-c,--circuit", circuit_path, "compiled circuit file")->required();
  query->add_option("-n,--network", network_path, "network JSON file")->required();
  query->add_option("-e,--evidence", evidence_str, "evidence string Var=value,...");
  query->add_flag("--prob", qf.prob, "print the probability of evidence");
  query->add_flag("--marginals", qf.marginals, "print all posterior marginals");
  query->add_flag("--families", qf.families, "print all family posteriors");
  query->add_option("--retract", qf.retract, "variable to retract evidence on");
  query->add_option("--what-if", qf.what_if, "Var=value alternative evidence probe");

  SensitivityFlags sf;
  CLI::App* sensitivity =
      app.add_subcommand("sensitivity", "derivatives of a posterior w.r.t. parameters");
  sensitivity->add_option("-c,--circuit", circuit_path, "compiled circuit file")->required();
  sensitivity->add_option("-n,--network", network_path, "network JSON file")->required();
  sensitivity->add_option("-e,--evidence", evidence_str, "evidence string");
  sensitivity->add_option("--target", sf.target, "target value Y=v");
  sensitivity->add_option("--param", sf.param, "parameter selector X|u or X=x|u");
  sensitivity->add_flag("--all-params", sf.all_params, "one row per network parameter");
  sensitivity->add_flag("--all-targets", sf.all_targets, "rows for every unobserved value");

  std::string target, param;
  bool verify = false;
  CLI::App* tweak = app.add_subcommand("tweak", "minimal parameter change reversing a ranking");
  tweak->add_option("-c,--circuit", circuit_path, "compiled circuit file")->required();
  tweak->add_option("-n,--network", network_path, "network JSON file")->required();
  tweak->add_option("-e,--evidence", evidence_str, "evidence string");
  tweak->add_option("--target", target, "target value Y=v")->required();
  tweak->add_option("--param", param, "parameter to change, X=x|u")->required();
  tweak->add_flag("--verify", verify, "re-evaluate the tweaked network by enumeration");

  CLI::App* stats = app.add_subcommand("stats", "circuit size and shape counters");
  stats->add_option("-c,--circuit", circuit_path, "compiled circuit file")->required();
  stats->add_option("-n,--network", network_path, "network JSON file (adds binding checks)");

  bool oprob = false, omarg = false;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "enumeration-based reference answers");
  oracle_cmd->group("");  // debugging aid, hidden from help
  oracle_cmd->add_option("-n,--network", network_path, "network JSON file")->required();
  oracle_cmd->add_option("-e,--evidence", evidence_str, "evidence string");
  oracle_cmd->add_flag("--prob", oprob, "print the probability of evidence");
  oracle_cmd->add_flag("--marginals", omarg, "print all posterior marginals");

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  std::string prog = "dac";
  argv.push_back(prog.data());
  for (std::string& a : storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (compile->parsed()) return cmd_compile(input, output, order_csv, err);
    if (query->parsed()) return cmd_query(circuit_path, network_path, evidence_str, qf, out);
    if (sensitivity->parsed())
      return cmd_sensitivity(circuit_path, network_path, evidence_str, sf, out);
    if (tweak->parsed())
      return cmd_tweak(circuit_path, network_path, evidence_str, target, param, verify, out, err);
    if (stats->parsed()) return cmd_stats(circuit_path, network_path, out);
    if (oracle_cmd->parsed())
      return cmd_oracle(network_path, evidence_str, oprob, omarg, out);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const QueryError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const BindError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dac
