#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bubbletree/error.hpp"

namespace bubbletree {

using NodeId = std::size_t;

struct NodeSpec {
    std::string id;
    std::string parent;  // empty for the root
    int time = 0;
};

/// Rooted event tree. Nodes are filtration atoms; leaves are the states.
///
/// Construction only resolves parent references. Structural invariants
/// (single root, time = parent time + 1, uniform depth) are checked by
/// validate_market so that malformed trees can still be reported on.
class EventTree {
public:
    EventTree() = default;
    EventTree(std::vector<NodeSpec> nodes, int horizon);

    std::size_t size() const { return labels_.size(); }
    int horizon() const { return horizon_; }

    const std::string& label(NodeId n) const { return labels_[n]; }
    std::optional<NodeId> find(std::string_view label) const;

    int time(NodeId n) const { return times_[n]; }
    std::optional<NodeId> parent(NodeId n) const { return parents_[n]; }
    std::span<const NodeId> children(NodeId n) const { return children_[n]; }
    bool is_leaf(NodeId n) const { return children_[n].empty(); }

    /// First node without a parent.
    NodeId root() const;

    /// Leaves in declaration order; leaf-probability vectors use this order.
    const std::vector<NodeId>& leaves() const { return leaves_; }
    std::size_t leaf_index(NodeId leaf) const { return leaf_index_[leaf]; }

    /// Nodes sorted by decreasing time (children before parents).
    const std::vector<NodeId>& backward_order() const { return backward_; }

    std::vector<NodeId> nodes_at(int t) const;
    std::vector<NodeId> path_to(NodeId n) const;  // root first
    bool is_ancestor_or_self(NodeId ancestor, NodeId n) const;
    std::vector<NodeId> leaves_below(NodeId n) const;

    /// Node at time `t` on the path to `n`.
    NodeId ancestor_at(NodeId n, int t) const;

private:
    int horizon_ = 0;
    std::vector<std::string> labels_;
    std::vector<int> times_;
    std::vector<std::optional<NodeId>> parents_;
    std::vector<std::vector<NodeId>> children_;
    std::vector<NodeId> leaves_;
    std::vector<std::size_t> leaf_index_;
    std::vector<NodeId> backward_;
    std::map<std::string, NodeId, std::less<>> index_;
};

/// Real value per node. An empty domain means the process is defined on
/// every node; otherwise only nodes with domain[n] != 0 carry a value.
struct AdaptedProcess {
    std::vector<double> values;
    std::vector<char> domain;

    AdaptedProcess() = default;
    explicit AdaptedProcess(std::size_t n, double fill = 0.0) : values(n, fill) {}

    double operator[](NodeId n) const { return values[n]; }
    double& operator[](NodeId n) { return values[n]; }
    std::size_t size() const { return values.size(); }
    bool defined(NodeId n) const { return domain.empty() || domain[n] != 0; }
};

enum class TauKind { bounded, unbounded_finite, possibly_infinite };

const char* to_string(TauKind kind);
std::optional<TauKind> parse_tau_kind(std::string_view text);

/// Maturity events. Paths without a tau node inside the horizon encode
/// {tau = infinity} within the truncation.
struct StoppingTime {
    std::vector<NodeId> nodes;
};

struct MarketSpec {
    EventTree tree;
    std::vector<double> rate;      // spot rate over (t, t+1] chosen at the node
    std::vector<double> price;     // ex-dividend market price
    std::vector<double> dividend;  // paid at the node
    StoppingTime tau;
    std::map<NodeId, double> payoff;  // terminal payoff X, keyed by tau node
    TauKind tau_kind = TauKind::possibly_infinite;
};

struct ValidationIssue {
    std::string invariant;
    std::vector<std::string> nodes;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    bool has(std::string_view invariant) const;
    std::string summary() const;
};

ValidationReport validate_market(const MarketSpec& spec);

/// Validated market with cached discounting and tau bookkeeping. All
/// downstream modules take a Market; building one from an invalid spec
/// throws Errc::invalid_input carrying the validation summary.
class Market {
public:
    explicit Market(MarketSpec spec);

    const MarketSpec& spec() const { return spec_; }
    const EventTree& tree() const { return spec_.tree; }
    int horizon() const { return spec_.tree.horizon(); }
    TauKind tau_kind() const { return spec_.tau_kind; }

    /// B at the node: product of (1 + r) over the strict ancestors.
    double discount(NodeId n) const { return discount_[n]; }
    double discounted_price(NodeId n) const { return spec_.price[n] / discount_[n]; }
    double discounted_dividend(NodeId n) const { return spec_.dividend[n] / discount_[n]; }
    /// Discounted terminal payoff at a tau node, 0 elsewhere.
    double discounted_payoff(NodeId n) const;

    bool before_tau(NodeId n) const { return phase_[n] == Phase::before; }
    bool is_tau(NodeId n) const { return phase_[n] == Phase::at; }
    bool after_tau(NodeId n) const { return phase_[n] == Phase::after; }

    /// Sum of discounted dividends paid on the path up to min(t, tau).
    double cumulative_dividends(NodeId n) const { return cum_dividend_[n]; }

    /// Leaves whose path holds no tau node.
    const std::vector<NodeId>& infinite_on() const { return infinite_on_; }

    /// Nonzero dividend anywhere up to and including tau.
    bool pays_dividends() const;

private:
    enum class Phase : char { before, at, after };
    MarketSpec spec_;
    std::vector<double> discount_;
    std::vector<double> cum_dividend_;
    std::vector<Phase> phase_;
    std::vector<NodeId> infinite_on_;
};

AdaptedProcess discount_factors(const Market& market);

/// Discounted wealth: S^ 1{t<tau} + sum_{u<=t^tau} D^_u + X^_tau 1{tau<=t}.
AdaptedProcess wealth_process(const Market& market);

/// Risky holding chosen at each node for the following step.
struct Strategy {
    std::vector<double> holding;
};

struct GainsResult {
    AdaptedProcess gains;          // G: sum of parent holding times wealth increment
    AdaptedProcess value;          // V = V_0 + G
    AdaptedProcess money_account;  // eta = pi * (cumulative dividends + paid payoff)
    bool self_financing = false;   // (pi(n) - pi(parent)) * W(n) == 0 everywhere
    double max_rebalancing = 0.0;
};

/// Throws Errc::constraint_violation when a holding is negative.
GainsResult gains_process(const Market& market, const Strategy& strategy,
                          double tol = kDefaultTolerance);

/// Terminal gain per leaf (in leaf order) of a strategy, evaluated directly.
std::vector<double> terminal_gains(const Market& market, const Strategy& strategy);

}  // namespace bubbletree
