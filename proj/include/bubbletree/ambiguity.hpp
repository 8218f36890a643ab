#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bubbletree/lattice.hpp"

namespace bubbletree {

enum class Bound { upper, lower };
enum class FamilyRole { actual, pricing };

/// Mass below this is treated as zero when deciding whether a node is charged.
inline constexpr double kMassEpsilon = 1e-14;

/// Per-child bounds lower_i <= p_i <= upper_i with sum p = 1.
struct TransitionBox {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Explicit finite list of transition vectors; the set is their convex hull.
struct TransitionVertices {
    std::vector<std::vector<double>> vertices;
};

using TransitionSet = std::variant<TransitionBox, TransitionVertices>;

/// Leaf-probability vectors in EventTree::leaves() order.
struct ExplicitFamily {
    std::vector<std::vector<double>> measures;
};

/// One transition set per node (entries for leaves are ignored).
struct RectangularFamily {
    std::vector<TransitionSet> transitions;
};

class MeasureFamily {
public:
    MeasureFamily() = default;
    MeasureFamily(ExplicitFamily family, FamilyRole role) : form_(std::move(family)), role_(role) {}
    MeasureFamily(RectangularFamily family, FamilyRole role) : form_(std::move(family)), role_(role) {}

    bool is_rectangular() const { return std::holds_alternative<RectangularFamily>(form_); }
    const ExplicitFamily& explicit_form() const { return std::get<ExplicitFamily>(form_); }
    const RectangularFamily& rectangular_form() const { return std::get<RectangularFamily>(form_); }
    FamilyRole role() const { return role_; }
    void set_role(FamilyRole role) { role_ = role; }

private:
    std::variant<ExplicitFamily, RectangularFamily> form_;
    FamilyRole role_ = FamilyRole::pricing;
};

/// Same box at every non-leaf node with the given child count; single-child
/// nodes get the point mass. Handy for fixtures and tests.
MeasureFamily uniform_box_family(const EventTree& tree, std::span<const double> lower,
                                 std::span<const double> upper, FamilyRole role);

ValidationReport validate_family(const EventTree& tree, const MeasureFamily& family);

struct StepOptimum {
    double value = 0.0;
    std::vector<double> weights;
};

/// Extremum of sum_i p_i v_i over one transition set. Boxes use the greedy
/// allocation: start from the lower bounds and hand the remaining mass to
/// children in value order, ties broken by child order.
StepOptimum optimize_transition(const TransitionSet& set, std::span<const double> child_values,
                                Bound bound);

/// Vertices of a transition set (box vertices are enumerated explicitly).
std::vector<std::vector<double>> transition_vertices(const TransitionSet& set);

/// Upper/lower conditional expectations over a measure family on a tree.
/// Rectangular families use backward recursion; explicit families take the
/// extremum over the measures charging the conditioning node.
///
/// Holds references: tree and family must outlive the evaluator.
class SublinearExpectation {
public:
    SublinearExpectation(const EventTree& tree, const MeasureFamily& family);

    const EventTree& tree() const { return tree_; }
    const MeasureFamily& family() const { return family_; }

    /// Conditional extremum of the time-`target` values of `x` at every node
    /// with time <= target. Nodes with later time, and polar nodes under an
    /// explicit family, hold NaN.
    std::vector<double> conditional(const AdaptedProcess& x, int target, Bound bound) const;

    /// Single node version; throws Errc::polar_node for uncharged nodes of an
    /// explicit family and Errc::invalid_input when time(node) > target.
    double at(const AdaptedProcess& x, int target, NodeId node, Bound bound) const;

    /// Shorthand for conditioning at the root on a leaf payoff (leaf order).
    double root_value(std::span<const double> leaf_payoff, Bound bound) const;

    /// sup over the family of the probability of reaching each node.
    const std::vector<double>& reach_upper() const { return reach_upper_; }
    bool charged(NodeId n) const { return reach_upper_[n] > kMassEpsilon; }

    /// A measure attaining the upper expectation of a leaf payoff at the root.
    std::vector<double> maximizing_measure(std::span<const double> leaf_payoff) const;

private:
    std::vector<double> conditional_explicit(const AdaptedProcess& x, int target, Bound bound) const;

    const EventTree& tree_;
    const MeasureFamily& family_;
    std::vector<double> reach_upper_;
    std::vector<std::vector<double>> node_mass_;  // explicit only: [measure][node]
};

/// Wraps a leaf payoff (leaf order) into a process defined at the horizon.
AdaptedProcess leaf_process(const EventTree& tree, std::span<const double> leaf_payoff);

/// Node probabilities of a leaf measure.
std::vector<double> node_masses(const EventTree& tree, std::span<const double> leaf_measure);

/// All products of per-node transition vertices as leaf-probability vectors.
/// Throws Errc::cap_exceeded when the product count would exceed `cap`.
std::vector<std::vector<double>> enumerate_extreme_measures(const EventTree& tree,
                                                            const MeasureFamily& family,
                                                            std::size_t cap = 200000);

enum class MartingaleClass { g_martingale, g_supermartingale, infi_supermartingale, none };

const char* to_string(MartingaleClass cls);

struct Classification {
    MartingaleClass cls = MartingaleClass::g_martingale;
    double worst_upper_slack = 0.0;   // min over checks of value - upper
    double worst_lower_slack = 0.0;   // min over checks of value - lower
    double martingale_gap = 0.0;      // max over checks of |value - upper|
    NodeId worst_node = 0;            // node attaining worst_upper_slack
    std::size_t checks = 0;
    std::vector<double> node_upper_slack;  // per node, NaN when never checked
    std::vector<double> node_lower_slack;

    bool at_least(MartingaleClass wanted) const;
};

/// Strongest class satisfied by `process` up to time `horizon`. Every pair
/// t < T' <= horizon is checked at charged nodes whose descendants at T'
/// all lie in the process domain.
Classification classify_process(const EventTree& tree, const MeasureFamily& family,
                                const AdaptedProcess& process, int horizon,
                                double tol = kDefaultTolerance);

bool check_full_support(const EventTree& tree, const MeasureFamily& family);

/// For each payoff, the pricing maximizer must be absolutely continuous with
/// respect to some measure of the actual family.
bool check_absolute_continuity(const EventTree& tree, const MeasureFamily& pricing,
                               const MeasureFamily& actual,
                               const std::vector<std::vector<double>>& leaf_payoffs);

}  // namespace bubbletree
