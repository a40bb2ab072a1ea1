#pragma once

#include <vector>

#include "dac/model.hpp"

namespace dac::oracle {

// Enumeration over full instantiations is exponential; anything larger than
// this is refused rather than attempted.
inline constexpr int kMaxVariables = 12;

// One probability per full instantiation, in mixed-radix order (first
// variable outermost). Entries sum to 1 for a valid quantification.
std::vector<double> joint_table(const Network& network);

// Sum over full instantiations of the product of consistent parameters and
// indicators, taken from the assignment. Ground truth for circuit values at
// arbitrary points.
double canonical_eval(const Network& network, const LeafAssignment& assignment);

// Probability of an event by summing consistent joint entries.
double prob(const Network& network, const Evidence& event);

// Exact partial derivative at (evidence, theta): drop the leaf's factor from
// every surviving monomial.
double derivative(const Network& network, const Evidence& evidence, const LeafRef& leaf);

// Exact mixed second partial; 0 when the two leaves share a variable or a
// family (no monomial contains both).
double second_derivative(const Network& network, const Evidence& evidence, const LeafRef& a,
                         const LeafRef& b);

}  // namespace dac::oracle
