#include "dac/queries.hpp"

#include <cmath>
#include <limits>

namespace dac {

bool MetaParameter::normalization_preserving(double tol) const {
  double sum = 0.0;
  for (double a : alpha) sum += a;
  return std::abs(sum) <= tol;
}

QuerySession::QuerySession(const Network& network, const Circuit& circuit, Evidence evidence)
    : network_(network),
      circuit_(circuit),
      evidence_(std::move(evidence)),
      leaves_(circuit, network) {
  for (const auto& [var, val] : evidence_.assignments())
    if (var < 0 || var >= network_.variable_count() || val < 0 || val >= network_.domain_size(var))
      throw std::invalid_argument("evidence references an unknown variable or value");
  state_ = upward_pass(circuit_, leaves_, network_, evidence_);
  downward_pass(circuit_, state_);
  prob_ = state_.value[circuit_.root()];
}

void QuerySession::require_positive_evidence() const {
  if (!(prob_ > 0.0)) throw QueryError("evidence has zero probability");
}

void QuerySession::require_unobserved(int variable) const {
  if (evidence_.has(variable))
    throw QueryError("variable '" + network_.variable(variable).name + "' is observed");
}

double QuerySession::partial_of_indicator(int variable, int value) const {
  return state_.partial[leaves_.node_of(LeafRef::indicator(variable, value))];
}

double QuerySession::partial_of_parameter(int family, int flat) const {
  return state_.partial[leaves_.node_of(LeafRef::parameter(family, flat))];
}

std::vector<double> QuerySession::posterior_marginal(int variable) const {
  require_positive_evidence();
  const int k = network_.domain_size(variable);
  std::vector<double> post(k, 0.0);
  if (evidence_.has(variable)) {
    post[evidence_.value_of(variable)] = 1.0;
    return post;
  }
  for (int x = 0; x < k; ++x) post[x] = partial_of_indicator(variable, x) / prob_;
  return post;
}

double QuerySession::what_if(int variable, int value) const {
  return partial_of_indicator(variable, value);
}

QuerySession::Retraction QuerySession::retraction(int variable) const {
  const int k = network_.domain_size(variable);
  Retraction r;
  for (int x = 0; x < k; ++x) r.prob_retracted += partial_of_indicator(variable, x);
  if (!(r.prob_retracted > 0.0))
    throw QueryError("evidence minus '" + network_.variable(variable).name +
                     "' has zero probability");
  r.posterior.resize(k);
  for (int x = 0; x < k; ++x)
    r.posterior[x] = partial_of_indicator(variable, x) / r.prob_retracted;
  return r;
}

double QuerySession::family_marginal(int family, int flat) const {
  require_positive_evidence();
  return partial_of_parameter(family, flat) * network_.theta(family, flat) / prob_;
}

std::vector<double> QuerySession::second_partials_vs(NodeId pinned) const {
  toggle_passes_ += 4;  // two pinned upward/downward pairs
  return second_derivatives_for(circuit_, leaves_, network_, evidence_, pinned);
}

double QuerySession::pair_marginal(int var_x, int val_x, int var_y, int val_y) const {
  if (var_x == var_y) throw std::invalid_argument("pair_marginal needs two distinct variables");
  const NodeId a = leaves_.node_of(LeafRef::indicator(var_x, val_x));
  const NodeId b = leaves_.node_of(LeafRef::indicator(var_y, val_y));
  return second_partials_vs(b)[a];
}

double QuerySession::pair_posterior(int var_x, int val_x, int var_y, int val_y) const {
  require_positive_evidence();
  require_unobserved(var_x);
  require_unobserved(var_y);
  return pair_marginal(var_x, val_x, var_y, val_y) / prob_;
}

double QuerySession::family_pair_marginal(int family1, int flat1, int family2, int flat2) const {
  if (family1 == family2)
    throw std::invalid_argument("family_pair_marginal needs two distinct families");
  const NodeId a = leaves_.node_of(LeafRef::parameter(family1, flat1));
  const NodeId b = leaves_.node_of(LeafRef::parameter(family2, flat2));
  return second_partials_vs(b)[a] * network_.theta(family1, flat1) * network_.theta(family2, flat2);
}

double QuerySession::sensitivity_theta(int y_var, int y_val, int family, int flat) const {
  require_positive_evidence();
  require_unobserved(y_var);
  const NodeId y = leaves_.node_of(LeafRef::indicator(y_var, y_val));
  const std::vector<double> dd = second_partials_vs(y);
  const double d_theta = partial_of_parameter(family, flat);
  const double d_y = state_.partial[y];
  const double dd_theta_y = dd[leaves_.node_of(LeafRef::parameter(family, flat))];
  return (dd_theta_y * prob_ - d_theta * d_y) / (prob_ * prob_);
}

std::vector<double> QuerySession::sensitivity_block(int y_var, int y_val, int family,
                                                    int parent_inst) const {
  require_positive_evidence();
  require_unobserved(y_var);
  const NodeId y = leaves_.node_of(LeafRef::indicator(y_var, y_val));
  const std::vector<double> dd = second_partials_vs(y);
  const double d_y = state_.partial[y];
  const int k = network_.domain_size(family);
  std::vector<double> out(k);
  for (int x = 0; x < k; ++x) {
    const int flat = network_.flat_of(family, x, parent_inst);
    const NodeId t = leaves_.node_of(LeafRef::parameter(family, flat));
    out[x] = (dd[t] * prob_ - state_.partial[t] * d_y) / (prob_ * prob_);
  }
  return out;
}

double QuerySession::sensitivity_meta(int y_var, int y_val, const MetaParameter& meta) const {
  if (static_cast<int>(meta.alpha.size()) != network_.domain_size(meta.variable))
    throw std::invalid_argument("meta parameter needs one coefficient per value");
  for (double a : meta.alpha)
    if (!std::isfinite(a)) throw std::invalid_argument("meta parameter coefficients must be finite");
  const std::vector<double> block =
      sensitivity_block(y_var, y_val, meta.variable, meta.parent_inst);
  double sum = 0.0;
  for (std::size_t x = 0; x < block.size(); ++x) sum += meta.alpha[x] * block[x];
  return sum;
}

TweakResult QuerySession::tweak_binary(int y_var, int y_val, int x_family, int x_val,
                                       int parent_inst) const {
  if (network_.domain_size(y_var) != 2 || network_.domain_size(x_family) != 2)
    throw std::invalid_argument("tweak_binary needs binary target and parameter variables");
  require_positive_evidence();
  require_unobserved(y_var);

  const int y_bar = 1 - y_val;
  const int x_bar = 1 - x_val;
  const int sel = network_.flat_of(x_family, x_val, parent_inst);
  const int alt = network_.flat_of(x_family, x_bar, parent_inst);
  const NodeId node_y = leaves_.node_of(LeafRef::indicator(y_var, y_val));
  const NodeId node_y_bar = leaves_.node_of(LeafRef::indicator(y_var, y_bar));

  // Ranking Pr(y|e,T') <= Pr(ybar|e,T') under theta_sel + d, theta_alt - d.
  // F and its indicator derivatives are jointly linear in the two co-varying
  // parameters (no monomial holds both), so the condition is exactly
  //   dF/dy - dF/dybar <= d * slope
  // with slope built from the four mixed second partials below.
  const double diff = state_.partial[node_y] - state_.partial[node_y_bar];
  const double theta_sel = network_.theta(x_family, sel);

  TweakResult result;
  result.theta_prime = theta_sel;
  result.required_theta = theta_sel;
  if (diff <= 0.0) return result;

  const std::vector<double> dd_sel =
      second_partials_vs(leaves_.node_of(LeafRef::parameter(x_family, sel)));
  const std::vector<double> dd_alt =
      second_partials_vs(leaves_.node_of(LeafRef::parameter(x_family, alt)));
  const double slope = (dd_sel[node_y_bar] - dd_sel[node_y]) +
                       (dd_alt[node_y] - dd_alt[node_y_bar]);

  if (slope == 0.0) {
    result.status = TweakResult::Status::Infeasible;
    result.required_theta = std::numeric_limits<double>::quiet_NaN();
    return result;
  }
  const double delta = diff / slope;
  double theta_prime = theta_sel + delta;
  result.required_theta = theta_prime;
  constexpr double slack = 1e-12;
  if (theta_prime < -slack || theta_prime > 1.0 + slack) {
    result.status = TweakResult::Status::Infeasible;
    return result;
  }
  theta_prime = std::min(1.0, std::max(0.0, theta_prime));
  result.status = TweakResult::Status::Tweaked;
  result.delta = delta;
  result.theta_prime = theta_prime;
  return result;
}

}  // namespace dac
