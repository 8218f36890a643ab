#include "bubbletree/claims.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bubbletree {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_american(ClaimKind kind) { return kind == ClaimKind::amer_call || kind == ClaimKind::amer_put; }

/// Time-`maturity` nodes below n in depth-first order.
void maturity_nodes_below(const EventTree& tree, NodeId n, int maturity, std::vector<NodeId>& out) {
    if (tree.time(n) == maturity) {
        out.push_back(n);
        return;
    }
    for (NodeId c : tree.children(n)) maturity_nodes_below(tree, c, maturity, out);
}

AdaptedProcess terminal_process(const Market& market, int maturity, auto&& payoff) {
    const EventTree& tree = market.tree();
    AdaptedProcess x(tree.size());
    for (NodeId n : tree.nodes_at(maturity)) x[n] = payoff(n);
    return x;
}

std::vector<double> upper_at(const Market& market, const MeasureFamily& pricing, const Claim& claim,
                             Bound bound) {
    const SublinearExpectation expect(market.tree(), pricing);
    const AdaptedProcess x = terminal_process(market, claim.maturity,
                                              [&](NodeId n) { return claim_payoff(market, claim, n); });
    return expect.conditional(x, claim.maturity, bound);
}

std::vector<double> asset_upper(const Market& market, const MeasureFamily& pricing, int maturity) {
    const SublinearExpectation expect(market.tree(), pricing);
    const AdaptedProcess x = terminal_process(market, maturity,
                                              [&](NodeId n) { return market.discounted_price(n); });
    return expect.conditional(x, maturity, Bound::upper);
}

Claim make_claim(ClaimKind kind, double strike, int maturity) {
    Claim c;
    c.kind = kind;
    c.strike = strike;
    c.maturity = maturity;
    return c;
}

}  // namespace

const char* to_string(ClaimKind kind) {
    switch (kind) {
        case ClaimKind::forward: return "forward";
        case ClaimKind::euro_call: return "euro_call";
        case ClaimKind::euro_put: return "euro_put";
        case ClaimKind::amer_call: return "amer_call";
        case ClaimKind::amer_put: return "amer_put";
        case ClaimKind::custom_terminal: return "custom_terminal";
    }
    return "unknown";
}

std::optional<ClaimKind> parse_claim_kind(std::string_view text) {
    if (text == "forward") return ClaimKind::forward;
    if (text == "ecall" || text == "euro_call") return ClaimKind::euro_call;
    if (text == "eput" || text == "euro_put") return ClaimKind::euro_put;
    if (text == "acall" || text == "amer_call") return ClaimKind::amer_call;
    if (text == "aput" || text == "amer_put") return ClaimKind::amer_put;
    if (text == "custom" || text == "custom_terminal") return ClaimKind::custom_terminal;
    return std::nullopt;
}

const char* to_string(QuoteKind kind) {
    switch (kind) {
        case QuoteKind::call: return "call";
        case QuoteKind::put: return "put";
        case QuoteKind::forward: return "forward";
        case QuoteKind::asset: return "asset";
        case QuoteKind::amer_call: return "amer_call";
        case QuoteKind::amer_put: return "amer_put";
    }
    return "unknown";
}

std::optional<QuoteKind> parse_quote_kind(std::string_view text) {
    if (text == "call") return QuoteKind::call;
    if (text == "put") return QuoteKind::put;
    if (text == "forward") return QuoteKind::forward;
    if (text == "asset") return QuoteKind::asset;
    if (text == "amer_call") return QuoteKind::amer_call;
    if (text == "amer_put") return QuoteKind::amer_put;
    return std::nullopt;
}

std::optional<double> MarketQuotes::get(QuoteKind kind, NodeId n) const {
    auto it = values.find(kind);
    if (it == values.end()) return std::nullopt;
    auto jt = it->second.find(n);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
}

double claim_payoff(const Market& market, const Claim& claim, NodeId n) {
    const double s = market.discounted_price(n);
    const double k = claim.strike / market.discount(n);
    switch (claim.kind) {
        case ClaimKind::forward: return s - k;
        case ClaimKind::euro_call:
        case ClaimKind::amer_call: return std::max(s - k, 0.0);
        case ClaimKind::euro_put:
        case ClaimKind::amer_put: return std::max(k - s, 0.0);
        case ClaimKind::custom_terminal: {
            auto it = claim.custom.find(n);
            return it == claim.custom.end() ? kNaN : it->second;
        }
    }
    return kNaN;
}

void check_claim_assumptions(const Market& market, const MeasureFamily& pricing, const Claim& claim) {
    const EventTree& tree = market.tree();
    if (!(claim.strike >= 0.0) || !std::isfinite(claim.strike)) {
        throw Error(Errc::invalid_input, "strike must be a nonnegative number");
    }
    if (claim.maturity < 0 || claim.maturity > tree.horizon()) {
        throw Error(Errc::invalid_input, "maturity must lie in [0, horizon]");
    }
    if (claim.kind == ClaimKind::custom_terminal) {
        for (NodeId n : tree.nodes_at(claim.maturity)) {
            if (!claim.custom.count(n)) {
                throw Error(Errc::invalid_input, "custom payoff missing at node '" + tree.label(n) + "'");
            }
        }
    }
    const SublinearExpectation expect(tree, pricing);
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (tree.time(n) > claim.maturity || !expect.charged(n)) continue;
        if (!market.before_tau(n)) {
            throw Error(Errc::assumption_violation,
                        "asset matures by the claim maturity at node '" + tree.label(n) + "'");
        }
        if (market.spec().dividend[n] != 0.0) {
            throw Error(Errc::assumption_violation,
                        "asset pays a dividend before maturity at node '" + tree.label(n) + "'");
        }
    }
}

AdaptedProcess fundamental_claim_price(const Market& market, const MeasureFamily& pricing,
                                       const Claim& claim) {
    if (is_american(claim.kind)) {
        throw Error(Errc::invalid_input, "use the American pricer for early-exercise claims");
    }
    check_claim_assumptions(market, pricing, claim);
    const EventTree& tree = market.tree();
    const std::vector<double> upper = upper_at(market, pricing, claim, Bound::upper);
    AdaptedProcess out(tree.size());
    out.domain.assign(tree.size(), 0);
    for (NodeId n = 0; n < tree.size(); ++n) {
        out[n] = upper[n];
        out.domain[n] = tree.time(n) <= claim.maturity && !std::isnan(upper[n]);
    }
    return out;
}

ParityBounds parity_bounds(const Market& market, const MeasureFamily& pricing, double strike,
                           int maturity, double tol) {
    const Claim forward = make_claim(ClaimKind::forward, strike, maturity);
    const Claim call = make_claim(ClaimKind::euro_call, strike, maturity);
    const Claim put = make_claim(ClaimKind::euro_put, strike, maturity);
    check_claim_assumptions(market, pricing, forward);
    const std::vector<double> lo = upper_at(market, pricing, forward, Bound::lower);
    const std::vector<double> up = upper_at(market, pricing, forward, Bound::upper);
    const std::vector<double> c = upper_at(market, pricing, call, Bound::upper);
    const std::vector<double> p = upper_at(market, pricing, put, Bound::upper);

    ParityBounds out;
    const EventTree& tree = market.tree();
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (tree.time(n) > maturity || std::isnan(up[n])) continue;
        ParityRow row{n, lo[n], c[n] - p[n], up[n], true};
        row.holds = row.lower - tol <= row.spread && row.spread <= row.upper + tol;
        out.holds = out.holds && row.holds;
        out.rows.push_back(row);
    }
    return out;
}

double market_asset_price(const Market& market, const MarketQuotes& quotes, NodeId n) {
    if (auto q = quotes.get(QuoteKind::asset, n)) return *q / market.discount(n);
    return market.discounted_price(n);
}

double market_forward_price(const Market& market, const MeasureFamily& pricing,
                            const MarketQuotes& quotes, double strike, int maturity, NodeId n) {
    if (auto q = quotes.get(QuoteKind::forward, n)) return *q / market.discount(n);
    const SublinearExpectation expect(market.tree(), pricing);
    const AdaptedProcess inv = terminal_process(market, maturity,
                                                [&](NodeId m) { return 1.0 / market.discount(m); });
    const double up = expect.at(inv, maturity, n, Bound::upper);
    const double lo = expect.at(inv, maturity, n, Bound::lower);
    if (std::abs(up - lo) > 1e-12) {
        throw Error(Errc::assumption_violation,
                    "forward price needs a forward quote when discounting is uncertain at node '" +
                        market.tree().label(n) + "'");
    }
    return market_asset_price(market, quotes, n) - strike * up;
}

MarketParity market_parity(const Market& market, const MeasureFamily& pricing,
                           const MarketQuotes& quotes, double strike, int maturity,
                           bool no_dominance, double tol) {
    MarketParity out;
    out.enforced = no_dominance;
    const EventTree& tree = market.tree();
    for (NodeId n = 0; n < tree.size(); ++n) {
        auto c = quotes.get(QuoteKind::call, n);
        auto p = quotes.get(QuoteKind::put, n);
        if (!c || !p || tree.time(n) > maturity) continue;
        const double b = market.discount(n);
        const double f = market_forward_price(market, pricing, quotes, strike, maturity, n);
        NodeVerdict row{n, (*c - *p) / b - f, true};
        row.holds = !no_dominance || std::abs(row.deviation) <= tol;
        out.holds = out.holds && row.holds;
        out.rows.push_back(row);
    }
    if (out.rows.empty()) throw Error(Errc::invalid_input, "market parity needs call and put quotes at a node");
    return out;
}

AdaptedProcess asset_claim_bubble(const Market& market, const MeasureFamily& pricing,
                                  const MarketQuotes& quotes, int maturity) {
    const EventTree& tree = market.tree();
    const std::vector<double> upper = asset_upper(market, pricing, maturity);
    AdaptedProcess out(tree.size());
    out.domain.assign(tree.size(), 0);
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (tree.time(n) > maturity || std::isnan(upper[n])) continue;
        out[n] = market_asset_price(market, quotes, n) - upper[n];
        out.domain[n] = 1;
    }
    return out;
}

ClaimBubbles claim_bubbles(const Market& market, const MeasureFamily& pricing,
                           const MarketQuotes& quotes, double strike, int maturity, double tol) {
    const Claim forward = make_claim(ClaimKind::forward, strike, maturity);
    const Claim call = make_claim(ClaimKind::euro_call, strike, maturity);
    const Claim put = make_claim(ClaimKind::euro_put, strike, maturity);
    check_claim_assumptions(market, pricing, forward);
    const std::vector<double> f_star = upper_at(market, pricing, forward, Bound::upper);
    const std::vector<double> c_star = upper_at(market, pricing, call, Bound::upper);
    const std::vector<double> p_star = upper_at(market, pricing, put, Bound::upper);
    const AdaptedProcess delta_s = asset_claim_bubble(market, pricing, quotes, maturity);

    ClaimBubbles out;
    const EventTree& tree = market.tree();
    for (NodeId n = 0; n < tree.size(); ++n) {
        auto c = quotes.get(QuoteKind::call, n);
        auto p = quotes.get(QuoteKind::put, n);
        if (!c || !p || !delta_s.defined(n)) continue;
        const double b = market.discount(n);
        ClaimBubbleRow row;
        row.node = n;
        row.delta_s = delta_s[n];
        row.delta_f = market_forward_price(market, pricing, quotes, strike, maturity, n) - f_star[n];
        row.delta_ec = *c / b - c_star[n];
        row.delta_ep = *p / b - p_star[n];
        row.holds = std::abs(row.delta_f - row.delta_s) <= tol && row.delta_s <= row.delta_ec - row.delta_ep + tol;
        out.holds = out.holds && row.holds;
        out.rows.push_back(row);
    }
    if (out.rows.empty()) throw Error(Errc::invalid_input, "claim bubbles need call and put quotes at a node");
    return out;
}

AmericanPrice american_fundamental_price(const Market& market, const MeasureFamily& pricing,
                                         const Claim& claim) {
    if (!is_american(claim.kind)) throw Error(Errc::invalid_input, "claim has no early exercise");
    if (!pricing.is_rectangular()) {
        throw Error(Errc::rectangularity_required, "American backward induction needs a rectangular family");
    }
    check_claim_assumptions(market, pricing, claim);
    const EventTree& tree = market.tree();
    const auto& transitions = pricing.rectangular_form().transitions;
    AmericanPrice out;
    out.value = AdaptedProcess(tree.size(), kNaN);
    out.continuation = AdaptedProcess(tree.size(), kNaN);
    out.value.domain.assign(tree.size(), 0);
    out.continuation.domain.assign(tree.size(), 0);
    out.exercise.assign(tree.size(), 0);
    std::vector<double> child_values;
    for (NodeId n : tree.backward_order()) {
        const int t = tree.time(n);
        if (t > claim.maturity) continue;
        const double payoff = claim_payoff(market, claim, n);
        out.value.domain[n] = 1;
        if (t == claim.maturity) {
            out.value[n] = payoff;
            out.exercise[n] = 1;
            continue;
        }
        auto kids = tree.children(n);
        child_values.resize(kids.size());
        for (std::size_t i = 0; i < kids.size(); ++i) child_values[i] = out.value[kids[i]];
        const double cont = optimize_transition(transitions[n], child_values, Bound::upper).value;
        out.continuation[n] = cont;
        out.continuation.domain[n] = 1;
        out.exercise[n] = payoff >= cont;
        out.value[n] = std::max(payoff, cont);
    }
    return out;
}

double stopping_rule_count(const EventTree& tree, int maturity) {
    std::vector<double> count(tree.size(), 1.0);
    for (NodeId n : tree.backward_order()) {
        if (tree.time(n) >= maturity) continue;
        double product = 1.0;
        for (NodeId c : tree.children(n)) product *= count[c];
        count[n] = 1.0 + product;
    }
    return count[tree.root()];
}

double american_oracle(const Market& market, const MeasureFamily& pricing, const Claim& claim,
                       std::size_t cap) {
    if (!is_american(claim.kind)) throw Error(Errc::invalid_input, "claim has no early exercise");
    check_claim_assumptions(market, pricing, claim);
    const EventTree& tree = market.tree();
    const double count = stopping_rule_count(tree, claim.maturity);
    if (count > static_cast<double>(cap)) {
        throw Error(Errc::cap_exceeded, "stopping rule count " + std::to_string(count) + " exceeds cap " +
                                            std::to_string(cap));
    }

    // rules[n]: stopped payoffs over the maturity nodes below n, one per rule.
    std::vector<std::vector<std::vector<double>>> rules(tree.size());
    for (NodeId n : tree.backward_order()) {
        const int t = tree.time(n);
        if (t > claim.maturity) continue;
        const double payoff = claim_payoff(market, claim, n);
        std::vector<NodeId> below;
        maturity_nodes_below(tree, n, claim.maturity, below);
        std::vector<std::vector<double>> list;
        list.emplace_back(below.size(), payoff);
        if (t < claim.maturity) {
            auto kids = tree.children(n);
            std::vector<std::size_t> pick(kids.size(), 0);
            while (true) {
                std::vector<double> combined;
                combined.reserve(below.size());
                for (std::size_t i = 0; i < kids.size(); ++i) {
                    const auto& r = rules[kids[i]][pick[i]];
                    combined.insert(combined.end(), r.begin(), r.end());
                }
                list.push_back(std::move(combined));
                std::size_t i = 0;
                while (i < kids.size() && ++pick[i] == rules[kids[i]].size()) pick[i++] = 0;
                if (i == kids.size()) break;
            }
            for (NodeId c : kids) std::vector<std::vector<double>>().swap(rules[c]);
        }
        rules[n] = std::move(list);
    }

    const NodeId root = tree.root();
    std::vector<NodeId> below;
    maturity_nodes_below(tree, root, claim.maturity, below);
    const SublinearExpectation expect(tree, pricing);
    AdaptedProcess x(tree.size());
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& rule : rules[root]) {
        for (std::size_t i = 0; i < below.size(); ++i) x[below[i]] = rule[i];
        best = std::max(best, expect.at(x, claim.maturity, root, Bound::upper));
    }
    return best;
}

AmericanBounds american_bounds(const Market& market, const MeasureFamily& pricing,
                               const MarketQuotes& quotes, double strike, int maturity, double tol) {
    const EventTree& tree = market.tree();
    const Claim euro_call = make_claim(ClaimKind::euro_call, strike, maturity);
    const Claim amer_call = make_claim(ClaimKind::amer_call, strike, maturity);
    const Claim euro_put = make_claim(ClaimKind::euro_put, strike, maturity);
    const AdaptedProcess euro = fundamental_claim_price(market, pricing, euro_call);
    const AdaptedProcess put = fundamental_claim_price(market, pricing, euro_put);
    const AdaptedProcess delta_s = asset_claim_bubble(market, pricing, quotes, maturity);

    AdaptedProcess amer(tree.size(), kNaN);
    amer.domain.assign(tree.size(), 0);
    if (pricing.is_rectangular()) {
        amer = american_fundamental_price(market, pricing, amer_call).value;
    } else {
        amer[tree.root()] = american_oracle(market, pricing, amer_call);
        amer.domain[tree.root()] = 1;
    }

    AmericanBounds out;
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (!amer.defined(n) || !euro.defined(n) || !delta_s.defined(n)) continue;
        AmericanBoundRow row{n, euro[n], amer[n], delta_s[n], true, true};
        row.lower_holds = row.euro <= row.amer + tol;
        row.upper_holds = row.amer <= row.euro + row.delta_s + tol;
        out.fundamental_holds = out.fundamental_holds && row.lower_holds && row.upper_holds;
        out.rows.push_back(row);
    }

    for (NodeId n = 0; n < tree.size(); ++n) {
        auto ce = quotes.get(QuoteKind::call, n);
        auto ca = quotes.get(QuoteKind::amer_call, n);
        auto pe = quotes.get(QuoteKind::put, n);
        if (!ce || !ca || !pe || !amer.defined(n) || !euro.defined(n)) continue;
        const double b = market.discount(n);
        const double c_e = *ce / b, c_a = *ca / b, p_e = *pe / b;
        const double d_ac = c_a - amer[n], d_ec = c_e - euro[n], d_ep = p_e - put[n];
        const double low = c_e + (d_ac - d_ec) - c_a;
        const double high = c_a - (c_e + (d_ac - d_ep));
        NodeVerdict row{n, std::max(low, high), true};
        row.holds = low <= tol && high <= tol;
        out.market_checked = true;
        out.market_holds = out.market_holds && row.holds;
        out.market_rows.push_back(row);
    }
    return out;
}

}  // namespace bubbletree
