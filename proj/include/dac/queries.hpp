#pragma once

#include <cstdint>
#include <vector>

#include "dac/circuit.hpp"
#include "dac/engine.hpp"
#include "dac/model.hpp"

namespace dac {

// Linear co-variation scheme for the parameters of variable X under a fixed
// parent instantiation: theta_x = alpha_x * tau + beta_x.
struct MetaParameter {
  int variable = -1;
  int parent_inst = 0;
  std::vector<double> alpha;  // one coefficient per value of X

  // False when no tau perturbation can keep the column summing to 1; callers
  // should surface a warning in that case.
  bool normalization_preserving(double tol = 1e-12) const;
};

struct TweakResult {
  enum class Status { AlreadySatisfied, Tweaked, Infeasible };
  Status status = Status::AlreadySatisfied;
  double delta = 0.0;           // signed minimal change to theta(x,u)
  double theta_prime = 0.0;     // resulting theta(x,u)
  double required_theta = 0.0;  // unclamped solution; outside [0,1] when infeasible
};

// One evidence's worth of answers: runs the two passes once at construction,
// then serves every first-derivative query from the stored workspace with no
// further circuit traversals. Second-derivative queries run private pinned
// passes and are counted separately.
class QuerySession {
 public:
  QuerySession(const Network& network, const Circuit& circuit, Evidence evidence);

  // F(e, theta) = Pr(e).
  double prob_evidence() const { return prob_; }

  // Pr(x|e) per value of X. Observed variables get the degenerate posterior
  // (1 on the observed value); retraction() serves the e-X posterior.
  std::vector<double> posterior_marginal(int variable) const;

  // Pr(x, e-X): the probability of e with X's evidence replaced by x.
  double what_if(int variable, int value) const;

  struct Retraction {
    double prob_retracted = 0.0;       // Pr(e - X)
    std::vector<double> posterior;     // Pr(x | e - X)
  };
  Retraction retraction(int variable) const;

  // Pr(f | e) for a family instantiation f = (x, u).
  double family_marginal(int family, int flat) const;

  // Pr(x, y, e - XY); X and Y must be distinct variables.
  double pair_marginal(int var_x, int val_x, int var_y, int val_y) const;
  // Pr(x, y | e); requires X, Y unobserved and Pr(e) > 0.
  double pair_posterior(int var_x, int val_x, int var_y, int val_y) const;

  // Pr(f1, f2, e) for instantiations of two distinct families.
  double family_pair_marginal(int family1, int flat1, int family2, int flat2) const;

  // dPr(y|e)/dtheta(x,u) with the family's other parameters held fixed;
  // Y must be unobserved.
  double sensitivity_theta(int y_var, int y_val, int family, int flat) const;
  // dPr(y|e)/dtheta for every parameter of `family` under parent
  // instantiation u, from a single pair of pinned passes.
  std::vector<double> sensitivity_block(int y_var, int y_val, int family, int parent_inst) const;
  // Chain rule over a linear co-variation scheme.
  double sensitivity_meta(int y_var, int y_val, const MetaParameter& meta) const;

  // Smallest change to theta(x_val, u) of binary X, co-varying its
  // complement to keep the column normalized, that makes
  // Pr(y|e) <= Pr(ybar|e) for binary unobserved Y.
  TweakResult tweak_binary(int y_var, int y_val, int x_family, int x_val, int parent_inst) const;

  const Network& network() const { return network_; }
  const Circuit& circuit() const { return circuit_; }
  const Evidence& evidence() const { return evidence_; }
  const PassState& state() const { return state_; }
  const LeafMap& leaves() const { return leaves_; }

  // Traversal accounting: the session itself costs exactly one upward and one
  // downward pass; first-derivative accessors never add to either counter.
  std::uint64_t base_passes() const { return 2; }
  std::uint64_t toggle_passes() const { return toggle_passes_; }

  double partial_of_indicator(int variable, int value) const;
  double partial_of_parameter(int family, int flat) const;

 private:
  void require_positive_evidence() const;
  void require_unobserved(int variable) const;
  std::vector<double> second_partials_vs(NodeId pinned) const;

  const Network& network_;
  const Circuit& circuit_;
  Evidence evidence_;
  LeafMap leaves_;
  PassState state_;
  double prob_ = 0.0;
  mutable std::uint64_t toggle_passes_ = 0;
};

}  // namespace dac
