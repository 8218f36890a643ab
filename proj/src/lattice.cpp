#include "bubbletree/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace bubbletree {

const char* to_string(Errc code) {
    switch (code) {
        case Errc::invalid_input: return "invalid input";
        case Errc::constraint_violation: return "constraint violation";
        case Errc::polar_node: return "polar node";
        case Errc::assumption_violation: return "assumption violation";
        case Errc::rectangularity_required: return "rectangularity required";
        case Errc::not_risk_neutral: return "not risk neutral";
        case Errc::arbitrage: return "arbitrage";
        case Errc::cap_exceeded: return "cap exceeded";
        case Errc::infeasible: return "infeasible";
        case Errc::unbounded: return "unbounded";
    }
    return "unknown";
}

int exit_code(Errc code) {
    switch (code) {
        case Errc::not_risk_neutral:
        case Errc::arbitrage:
            return 2;
        case Errc::cap_exceeded:
        case Errc::infeasible:
        case Errc::unbounded:
            return 3;
        default:
            return 1;
    }
}

const char* to_string(TauKind kind) {
    switch (kind) {
        case TauKind::bounded: return "bounded";
        case TauKind::unbounded_finite: return "unbounded_finite";
        case TauKind::possibly_infinite: return "possibly_infinite";
    }
    return "unknown";
}

std::optional<TauKind> parse_tau_kind(std::string_view text) {
    if (text == "bounded") return TauKind::bounded;
    if (text == "unbounded_finite") return TauKind::unbounded_finite;
    if (text == "possibly_infinite") return TauKind::possibly_infinite;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// EventTree

EventTree::EventTree(std::vector<NodeSpec> nodes, int horizon) : horizon_(horizon) {
    const std::size_t n = nodes.size();
    labels_.reserve(n);
    times_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels_.push_back(nodes[i].id);
        times_.push_back(nodes[i].time);
        index_.emplace(nodes[i].id, i);  // first declaration wins
    }
    parents_.assign(n, std::nullopt);
    children_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        if (nodes[i].parent.empty()) continue;
        auto it = index_.find(nodes[i].parent);
        if (it == index_.end()) {
            throw Error(Errc::invalid_input, "node '" + nodes[i].id + "' references unknown parent '" +
                                                 nodes[i].parent + "'");
        }
        if (it->second == i) {
            throw Error(Errc::invalid_input, "node '" + nodes[i].id + "' is its own parent");
        }
        parents_[i] = it->second;
        children_[it->second].push_back(i);
    }
    leaf_index_.assign(n, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < n; ++i) {
        if (children_[i].empty()) {
            leaf_index_[i] = leaves_.size();
            leaves_.push_back(i);
        }
    }
    backward_.resize(n);
    std::iota(backward_.begin(), backward_.end(), NodeId{0});
    std::stable_sort(backward_.begin(), backward_.end(),
                     [this](NodeId a, NodeId b) { return times_[a] > times_[b]; });
}

std::optional<NodeId> EventTree::find(std::string_view label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

NodeId EventTree::root() const {
    for (NodeId i = 0; i < size(); ++i) {
        if (!parents_[i]) return i;
    }
    throw Error(Errc::invalid_input, "tree has no root");
}

std::vector<NodeId> EventTree::nodes_at(int t) const {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < size(); ++i) {
        if (times_[i] == t) out.push_back(i);
    }
    return out;
}

std::vector<NodeId> EventTree::path_to(NodeId n) const {
    std::vector<NodeId> path;
    for (std::optional<NodeId> cur = n; cur; cur = parents_[*cur]) path.push_back(*cur);
    std::reverse(path.begin(), path.end());
    return path;
}

bool EventTree::is_ancestor_or_self(NodeId ancestor, NodeId n) const {
    for (std::optional<NodeId> cur = n; cur; cur = parents_[*cur]) {
        if (*cur == ancestor) return true;
        if (times_[*cur] < times_[ancestor]) return false;
    }
    return false;
}

std::vector<NodeId> EventTree::leaves_below(NodeId n) const {
    std::vector<NodeId> out;
    std::vector<NodeId> stack{n};
    while (!stack.empty()) {
        NodeId cur = stack.back();
        stack.pop_back();
        if (children_[cur].empty()) {
            out.push_back(cur);
            continue;
        }
        for (auto it = children_[cur].rbegin(); it != children_[cur].rend(); ++it) stack.push_back(*it);
    }
    return out;
}

NodeId EventTree::ancestor_at(NodeId n, int t) const {
    NodeId cur = n;
    while (times_[cur] > t) cur = *parents_[cur];
    return cur;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::has(std::string_view invariant) const {
    return std::any_of(issues.begin(), issues.end(),
                       [&](const ValidationIssue& i) { return i.invariant == invariant; });
}

std::string ValidationReport::summary() const {
    if (ok()) return "valid";
    std::ostringstream os;
    for (std::size_t i = 0; i < issues.size(); ++i) {
        if (i) os << "; ";
        os << issues[i].invariant;
        if (!issues[i].nodes.empty()) {
            os << " [";
            for (std::size_t k = 0; k < issues[i].nodes.size(); ++k) {
                if (k) os << ", ";
                os << issues[i].nodes[k];
            }
            os << "]";
        }
    }
    return os.str();
}

namespace {

class IssueCollector {
public:
    void add(const std::string& invariant, const std::string& node = {}) {
        for (auto& issue : report_.issues) {
            if (issue.invariant == invariant) {
                if (!node.empty()) issue.nodes.push_back(node);
                return;
            }
        }
        ValidationIssue issue{invariant, {}};
        if (!node.empty()) issue.nodes.push_back(node);
        report_.issues.push_back(std::move(issue));
    }
    ValidationReport take() { return std::move(report_); }
    bool ok() const { return report_.ok(); }

private:
    ValidationReport report_;
};

void check_values(IssueCollector& issues, const EventTree& tree, const std::vector<double>& values,
                  const char* what, const std::string& negative_label) {
    if (values.size() != tree.size()) {
        issues.add(std::string("missing ") + what);
        return;
    }
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (!std::isfinite(values[n])) {
            issues.add(std::string("non-finite ") + what, tree.label(n));
        } else if (values[n] < 0.0) {
            issues.add(negative_label, tree.label(n));
        }
    }
}

}  // namespace

ValidationReport validate_market(const MarketSpec& spec) {
    IssueCollector issues;
    const EventTree& tree = spec.tree;
    const std::size_t n = tree.size();
    if (n == 0) {
        issues.add("empty tree");
        return issues.take();
    }
    if (tree.horizon() < 1) issues.add("horizon must be at least 1");

    std::set<std::string> seen;
    for (NodeId i = 0; i < n; ++i) {
        if (!seen.insert(tree.label(i)).second) issues.add("duplicate node id", tree.label(i));
    }
    std::size_t roots = 0;
    for (NodeId i = 0; i < n; ++i) {
        if (tree.parent(i)) continue;
        ++roots;
        if (tree.time(i) != 0) issues.add("root time must be 0", tree.label(i));
    }
    if (roots != 1) issues.add(roots == 0 ? "no root" : "multiple roots");

    bool times_ok = true;
    for (NodeId i = 0; i < n; ++i) {
        if (auto p = tree.parent(i); p && tree.time(i) != tree.time(*p) + 1) {
            issues.add("time must equal parent time + 1", tree.label(i));
            times_ok = false;
        }
    }
    for (NodeId leaf : tree.leaves()) {
        if (tree.time(leaf) != tree.horizon()) issues.add("non-uniform depth", tree.label(leaf));
    }

    check_values(issues, tree, spec.rate, "rates", "negative rate");
    check_values(issues, tree, spec.price, "prices", "negative price");
    check_values(issues, tree, spec.dividend, "dividends", "negative dividend");

    std::set<NodeId> tau_set;
    for (NodeId t : spec.tau.nodes) {
        if (t >= n) {
            issues.add("tau node out of range");
            continue;
        }
        if (!tau_set.insert(t).second) issues.add("duplicate tau node", tree.label(t));
        if (!tree.parent(t)) issues.add("tau must be strictly positive", tree.label(t));
    }
    for (const auto& [node, value] : spec.payoff) {
        if (node >= n) {
            issues.add("payoff node out of range");
            continue;
        }
        if (!tau_set.count(node)) issues.add("payoff defined off tau nodes", tree.label(node));
        if (!std::isfinite(value)) {
            issues.add("non-finite payoff", tree.label(node));
        } else if (value < 0.0) {
            issues.add("negative payoff", tree.label(node));
        }
    }
    for (NodeId t : tau_set) {
        if (!spec.payoff.count(t)) issues.add("missing payoff at tau node", tree.label(t));
    }

    // Ancestor walks are only safe once parent times strictly decrease.
    if (times_ok && roots == 1) {
        for (NodeId t : tau_set) {
            for (auto p = tree.parent(t); p; p = tree.parent(*p)) {
                if (tau_set.count(*p)) {
                    issues.add("tau nodes must form an antichain", tree.label(t));
                    break;
                }
            }
        }
        std::size_t infinite = 0;
        for (NodeId leaf : tree.leaves()) {
            bool hit = false;
            for (std::optional<NodeId> p = leaf; p && !hit; p = tree.parent(*p)) hit = tau_set.count(*p) > 0;
            if (!hit) ++infinite;
        }
        if (spec.tau_kind == TauKind::bounded && infinite > 0) {
            issues.add("bounded tau requires every path to reach a tau node");
        }
        if (spec.tau_kind == TauKind::possibly_infinite && infinite == 0) {
            issues.add("possibly_infinite tau requires a path without tau node");
        }
    }
    return issues.take();
}

// ---------------------------------------------------------------------------
// Market

Market::Market(MarketSpec spec) : spec_(std::move(spec)) {
    if (auto report = validate_market(spec_); !report.ok()) {
        throw Error(Errc::invalid_input, "invalid market: " + report.summary());
    }
    const EventTree& tree = spec_.tree;
    const std::size_t n = tree.size();
    std::set<NodeId> tau_set(spec_.tau.nodes.begin(), spec_.tau.nodes.end());

    discount_.assign(n, 1.0);
    cum_dividend_.assign(n, 0.0);
    phase_.assign(n, Phase::before);
    const auto& order = tree.backward_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        NodeId node = *it;
        auto p = tree.parent(node);
        if (!p) {
            discount_[node] = 1.0;
            cum_dividend_[node] = spec_.dividend[node];
            continue;
        }
        discount_[node] = discount_[*p] * (1.0 + spec_.rate[*p]);
        if (phase_[*p] != Phase::before) {
            phase_[node] = Phase::after;
            cum_dividend_[node] = cum_dividend_[*p];
        } else {
            phase_[node] = tau_set.count(node) ? Phase::at : Phase::before;
            cum_dividend_[node] = cum_dividend_[*p] + spec_.dividend[node] / discount_[node];
        }
    }
    for (NodeId leaf : tree.leaves()) {
        if (phase_[leaf] == Phase::before) infinite_on_.push_back(leaf);
    }
}

double Market::discounted_payoff(NodeId n) const {
    auto it = spec_.payoff.find(n);
    return it == spec_.payoff.end() ? 0.0 : it->second / discount_[n];
}

bool Market::pays_dividends() const {
    for (NodeId n = 0; n < tree().size(); ++n) {
        if (!after_tau(n) && spec_.dividend[n] != 0.0) return true;
    }
    return false;
}

AdaptedProcess discount_factors(const Market& market) {
    AdaptedProcess out(market.tree().size());
    for (NodeId n = 0; n < out.size(); ++n) out[n] = market.discount(n);
    return out;
}

AdaptedProcess wealth_process(const Market& market) {
    const EventTree& tree = market.tree();
    AdaptedProcess w(tree.size());
    std::vector<double> paid(tree.size(), 0.0);
    const auto& order = tree.backward_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        NodeId n = *it;
        if (market.is_tau(n)) {
            paid[n] = market.discounted_payoff(n);
        } else if (market.after_tau(n)) {
            paid[n] = paid[*tree.parent(n)];
        }
        double value = market.cumulative_dividends(n) + paid[n];
        if (market.before_tau(n)) value += market.discounted_price(n);
        w[n] = value;
    }
    return w;
}

GainsResult gains_process(const Market& market, const Strategy& strategy, double tol) {
    const EventTree& tree = market.tree();
    if (strategy.holding.size() != tree.size()) {
        throw Error(Errc::invalid_input, "strategy must assign a holding to every node");
    }
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (!(strategy.holding[n] >= 0.0)) {
            throw Error(Errc::constraint_violation,
                        "short sale prohibited: negative holding at node '" + tree.label(n) + "'");
        }
    }
    const AdaptedProcess w = wealth_process(market);
    GainsResult out;
    out.gains = AdaptedProcess(tree.size());
    out.value = AdaptedProcess(tree.size());
    out.money_account = AdaptedProcess(tree.size());
    out.self_financing = true;

    const NodeId root = tree.root();
    const double v0 = strategy.holding[root] * w[root];
    const auto& order = tree.backward_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        NodeId n = *it;
        const double pi = strategy.holding[n];
        if (auto p = tree.parent(n)) {
            out.gains[n] = out.gains[*p] + strategy.holding[*p] * (w[n] - w[*p]);
            const double rebalance = std::abs((pi - strategy.holding[*p]) * w[n]);
            out.max_rebalancing = std::max(out.max_rebalancing, rebalance);
            if (rebalance > tol) out.self_financing = false;
        }
        out.value[n] = v0 + out.gains[n];
        const double cash = market.before_tau(n) ? w[n] - market.discounted_price(n) : w[n];
        out.money_account[n] = pi * cash;
    }
    return out;
}

std::vector<double> terminal_gains(const Market& market, const Strategy& strategy) {
    const EventTree& tree = market.tree();
    const AdaptedProcess w = wealth_process(market);
    std::vector<double> out;
    out.reserve(tree.leaves().size());
    for (NodeId leaf : tree.leaves()) {
        double g = 0.0;
        for (auto cur = leaf; tree.parent(cur); cur = *tree.parent(cur)) {
            NodeId p = *tree.parent(cur);
            g += strategy.holding[p] * (w[cur] - w[p]);
        }
        out.push_back(g);
    }
    return out;
}

}  // namespace bubbletree
