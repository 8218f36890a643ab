#pragma once

// Brute-force reference implementations used by the unit and acceptance
// tests. They share types with the library but none of its algorithms.

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "bubbletree/ambiguity.hpp"
#include "bubbletree/lattice.hpp"

namespace oracle {

using bubbletree::Bound;
using bubbletree::EventTree;
using bubbletree::Market;
using bubbletree::MeasureFamily;
using bubbletree::NodeId;

/// Box corners found by fixing all but one coordinate at a bound.
std::vector<std::vector<double>> box_vertices(const std::vector<double>& lo, const std::vector<double>& hi);
std::vector<std::vector<double>> vertices(const bubbletree::TransitionSet& set);

/// Conditional extremum at every node with time <= T of `node_values`
/// (read at time-T nodes). Rectangular families by recursion over
/// enumerated vertices, explicit families by scanning the measures.
std::vector<double> conditional(const EventTree& tree, const MeasureFamily& family,
                                const std::vector<double>& node_values, int T, Bound bound);

double root_value(const EventTree& tree, const MeasureFamily& family, const std::vector<double>& leaf_payoff,
                  Bound bound);

/// Node mass of every leaf measure of a family, maximised.
std::vector<double> reach(const EventTree& tree, const MeasureFamily& family);

/// Discounted wealth computed from the raw spec.
std::vector<double> wealth(const Market& market);

/// Discounted cash flows received up to each node.
std::vector<double> cash_flows(const Market& market);

/// Some charged node whose charged children all have dW >= 0 with one > 0.
bool local_arbitrage(const Market& market, const MeasureFamily& actual, double eps = 1e-9);

/// Per-node dual of the one-period short-sale-constrained superhedge,
/// solved by enumerating point masses and zero-drift pairs. nullopt when
/// some charged node admits no supermartingale step.
std::optional<double> superhedge_value(const Market& market, const MeasureFamily& actual,
                                       const std::vector<double>& leaf_payoff);

/// Terminal gains per leaf of holding `holding[n]` over each step.
std::vector<double> path_gains(const Market& market, const std::vector<double>& holding);

/// Best stopping rule on [0, T] found by listing every rule explicitly.
double american_value(const EventTree& tree, const MeasureFamily& rect,
                      const std::function<double(NodeId)>& payoff, int T);

std::vector<double> random_payoff(std::mt19937_64& rng, std::size_t n, double lo = -2.0, double hi = 2.0);

}  // namespace oracle
