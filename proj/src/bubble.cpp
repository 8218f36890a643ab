#include "bubbletree/bubble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bubbletree {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kIdentityTolerance = 1e-12;

std::vector<char> before_tau_domain(const Market& market) {
    std::vector<char> domain(market.tree().size());
    for (NodeId n = 0; n < domain.size(); ++n) domain[n] = market.before_tau(n);
    return domain;
}

AdaptedProcess discounted_price_process(const Market& market) {
    AdaptedProcess s(market.tree().size());
    for (NodeId n = 0; n < s.size(); ++n) s[n] = market.before_tau(n) ? market.discounted_price(n) : 0.0;
    s.domain = before_tau_domain(market);
    return s;
}

/// Upper conditional expectation of the terminal cash flows; equals W*.
std::vector<double> upper_cash_flows(const Market& market, const MeasureFamily& pricing) {
    const SublinearExpectation expect(market.tree(), pricing);
    return expect.conditional(cash_flow_process(market), market.horizon(), Bound::upper);
}

}  // namespace

AdaptedProcess cash_flow_process(const Market& market) {
    AdaptedProcess z = wealth_process(market);
    for (NodeId n = 0; n < z.size(); ++n) {
        if (market.before_tau(n)) z[n] -= market.discounted_price(n);
    }
    return z;
}

AdaptedProcess fundamental_price(const Market& market, const MeasureFamily& pricing) {
    const EventTree& tree = market.tree();
    const AdaptedProcess z = cash_flow_process(market);
    const std::vector<double> upper = upper_cash_flows(market, pricing);
    AdaptedProcess s_star(tree.size());
    s_star.domain.assign(tree.size(), 1);
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (market.is_tau(n)) {
            s_star[n] = market.discounted_payoff(n);
        } else if (market.after_tau(n)) {
            s_star[n] = 0.0;
        } else if (std::isnan(upper[n])) {
            s_star[n] = kNaN;
            s_star.domain[n] = 0;
        } else {
            s_star[n] = upper[n] - z[n];
        }
    }
    return s_star;
}

FundamentalWealth fundamental_wealth(const Market& market, const MeasureFamily& pricing, double tol) {
    const EventTree& tree = market.tree();
    const std::vector<double> upper = upper_cash_flows(market, pricing);
    FundamentalWealth out;
    out.w_star = AdaptedProcess(tree.size());
    out.w_star.domain.assign(tree.size(), 1);
    for (NodeId n = 0; n < tree.size(); ++n) {
        out.w_star[n] = upper[n];
        if (std::isnan(upper[n])) out.w_star.domain[n] = 0;
    }
    out.classification = classify_process(tree, pricing, out.w_star, tree.horizon(), tol);
    out.is_g_martingale = out.classification.cls == MartingaleClass::g_martingale;
    return out;
}

AdaptedProcess bubble_process(const Market& market, const MeasureFamily& pricing) {
    const EventTree& tree = market.tree();
    const AdaptedProcess s_star = fundamental_price(market, pricing);
    AdaptedProcess beta(tree.size());
    beta.domain = before_tau_domain(market);
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (!market.before_tau(n)) continue;
        if (!s_star.defined(n)) {
            beta[n] = kNaN;
            beta.domain[n] = 0;
            continue;
        }
        beta[n] = market.discounted_price(n) - s_star[n];
    }
    return beta;
}

double bubble_identity_error(const Market& market, const MeasureFamily& pricing) {
    const AdaptedProcess beta = bubble_process(market, pricing);
    const AdaptedProcess w = wealth_process(market);
    const std::vector<double> w_star = upper_cash_flows(market, pricing);
    double worst = 0.0;
    for (NodeId n = 0; n < beta.size(); ++n) {
        if (!beta.defined(n)) continue;
        worst = std::max(worst, std::abs(beta[n] - (w[n] - w_star[n])));
    }
    return worst;
}

bool bubble_exists(const Market& market, const AdaptedProcess& beta, const MeasureFamily& actual,
                   double tol) {
    const SublinearExpectation expect(market.tree(), actual);
    for (NodeId n = 0; n < beta.size(); ++n) {
        if (beta.defined(n) && expect.charged(n) && beta[n] > tol) return true;
    }
    return false;
}

BubbleClassification classify_bubble(const Market& market, const MeasureFamily& pricing,
                                     const MeasureFamily& actual, const AdaptedProcess& beta,
                                     double tol) {
    const EventTree& tree = market.tree();
    BubbleClassification out;
    out.bubble_class = classify_process(tree, pricing, beta, tree.horizon(), tol);
    out.price_class = classify_process(tree, pricing, discounted_price_process(market), tree.horizon(), tol);
    out.exists = bubble_exists(market, beta, actual, tol);

    const bool bounded = market.tau_kind() == TauKind::bounded;
    const MartingaleClass wanted =
        bounded ? MartingaleClass::g_supermartingale : MartingaleClass::infi_supermartingale;
    const std::string wanted_name = to_string(wanted);

    out.beta_type.applicable = out.exists;
    if (out.exists) {
        out.beta_type.holds = out.bubble_class.at_least(wanted);
        out.beta_type.note = "beta expected " + wanted_name + ", got " + to_string(out.bubble_class.cls);
        if (!out.beta_type.holds) out.beta_type.nodes.push_back(out.bubble_class.worst_node);
    } else {
        out.beta_type.note = "no bubble";
    }

    out.price_level.applicable = out.exists;
    if (out.exists) {
        out.price_level.holds = out.price_class.at_least(wanted);
        out.price_level.note = "price expected " + wanted_name + ", got " + to_string(out.price_class.cls);
        if (!out.price_level.holds) out.price_level.nodes.push_back(out.price_class.worst_node);
    } else {
        out.price_level.note = "no bubble";
    }

    const bool premise = !market.pays_dividends() &&
                         out.price_class.at_least(MartingaleClass::g_supermartingale) &&
                         out.price_class.cls != MartingaleClass::g_martingale;
    out.sufficiency.applicable = premise;
    if (premise) {
        out.sufficiency.holds = out.exists;
        out.sufficiency.note = out.exists ? "strict G-supermartingale price carries a bubble"
                                          : "strict G-supermartingale price without bubble";
    } else {
        out.sufficiency.note = "premise not met";
    }
    return out;
}

CorollaryReport check_bubble_properties(const Market& market, const MeasureFamily& actual,
                                        const AdaptedProcess& beta, bool no_arbitrage, double tol) {
    const EventTree& tree = market.tree();
    const SublinearExpectation expect(tree, actual);
    CorollaryReport out;

    out.nonneg_under_noarb.applicable = no_arbitrage;
    if (no_arbitrage) {
        for (NodeId n = 0; n < tree.size(); ++n) {
            if (beta.defined(n) && expect.charged(n) && beta[n] < -tol) out.nonneg_under_noarb.nodes.push_back(n);
        }
        out.nonneg_under_noarb.holds = out.nonneg_under_noarb.nodes.empty();
        out.nonneg_under_noarb.note = out.nonneg_under_noarb.holds ? "beta >= 0" : "negative bubble";
    } else {
        out.nonneg_under_noarb.note = "market fails no-arbitrage";
    }

    out.vanishes_at_tau.applicable = true;
    for (NodeId n : market.spec().tau.nodes) {
        if (std::abs(beta[n]) > kIdentityTolerance) out.vanishes_at_tau.nodes.push_back(n);
    }
    out.vanishes_at_tau.holds = out.vanishes_at_tau.nodes.empty();
    out.vanishes_at_tau.note = out.vanishes_at_tau.holds ? "beta = 0 at tau" : "beta nonzero at tau";

    Check& persist = out.persistence;
    persist.applicable = !market.pays_dividends();
    if (!persist.applicable) {
        persist.note = "asset pays dividends";
        return out;
    }
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (!beta.defined(n) || std::abs(beta[n]) > tol) continue;
        auto parent = tree.parent(n);
        if (parent && beta.defined(*parent) && std::abs(beta[*parent]) <= tol) continue;
        // n starts a zero run; every descendant must stay at zero.
        std::vector<NodeId> stack(tree.children(n).begin(), tree.children(n).end());
        while (!stack.empty()) {
            const NodeId m = stack.back();
            stack.pop_back();
            if (beta.defined(m) && std::abs(beta[m]) > tol) {
                persist.nodes.push_back(m);
                continue;
            }
            for (NodeId c : tree.children(m)) stack.push_back(c);
        }
    }
    std::sort(persist.nodes.begin(), persist.nodes.end());
    persist.nodes.erase(std::unique(persist.nodes.begin(), persist.nodes.end()), persist.nodes.end());
    if (market.tau_kind() == TauKind::bounded) {
        persist.holds = persist.nodes.empty();
        persist.note = persist.holds ? "zero bubble persists" : "bubble reappears after vanishing";
    } else {
        persist.holds = true;
        persist.note = persist.nodes.empty() ? "no counterexample"
                                             : "counterexample recorded (persistence not expected)";
    }
    return out;
}

std::optional<Dominance> find_dominating_strategy(const Market& market, const MeasureFamily& pricing,
                                                  const MeasureFamily& actual, double tol) {
    const EventTree& tree = market.tree();
    const NodeId root = tree.root();
    const AdaptedProcess z = cash_flow_process(market);
    std::vector<double> payoff;
    payoff.reserve(tree.leaves().size());
    for (NodeId leaf : tree.leaves()) payoff.push_back(z[leaf] - z[root]);

    Dominance out;
    out.root_price = market.before_tau(root) ? market.discounted_price(root) : 0.0;
    out.fundamental_root = fundamental_price(market, pricing)[root];
    out.hedge = superhedge(market, actual, payoff);
    out.hedge_cost = out.hedge.price;
    if (!(out.hedge_cost < out.root_price - tol)) return std::nullopt;

    out.comparison.holding.assign(tree.size(), 1.0);
    const SublinearExpectation expect(tree, actual);
    const std::vector<double> hedge = terminal_gains(market, out.hedge.strategy);
    const std::vector<double> hold = terminal_gains(market, out.comparison);
    out.hedge_gains.assign(hedge.size(), kNaN);
    out.comparison_gains.assign(hold.size(), kNaN);
    out.min_gap = std::numeric_limits<double>::infinity();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hedge.size(); ++i) {
        const NodeId leaf = tree.leaves()[i];
        if (!expect.charged(leaf)) continue;
        out.hedge_gains[i] = hedge[i];
        out.comparison_gains[i] = hold[i];
        const double gap = hedge[i] - hold[i];
        out.min_gap = std::min(out.min_gap, gap);
        if (gap > best) {
            best = gap;
            out.strict_leaf = leaf;
        }
    }
    if (out.min_gap < -tol || best <= tol) return std::nullopt;
    return out;
}

}  // namespace bubbletree
