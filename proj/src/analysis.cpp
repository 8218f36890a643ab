#include "bubbletree/analysis.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bubbletree/bubble.hpp"
#include "bubbletree/noarb.hpp"

namespace bubbletree {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

Report base_report(const Instance& inst, std::string command) {
    Report r;
    r.command = std::move(command);
    const EventTree& tree = inst.market.tree();
    for (NodeId n = 0; n < tree.size(); ++n) {
        r.node_ids.push_back(tree.label(n));
        r.times.push_back(tree.time(n));
    }
    return r;
}

std::vector<double> masked(const AdaptedProcess& p) {
    std::vector<double> out(p.size());
    for (NodeId n = 0; n < p.size(); ++n) out[n] = p.defined(n) ? p[n] : kNaN;
    return out;
}

std::vector<std::string> labels(const EventTree& tree, const std::vector<NodeId>& nodes) {
    std::vector<std::string> out;
    for (NodeId n : nodes) out.push_back(tree.label(n));
    return out;
}

ReportVerdict verdict_from(const std::string& name, const Check& check, const EventTree& tree) {
    return ReportVerdict{name, check.holds, check.applicable, check.note, labels(tree, check.nodes)};
}

std::string describe(const Classification& c) {
    return std::string(to_string(c.cls)) + " (worst upper slack " + format_number(c.worst_upper_slack) +
           ", worst lower slack " + format_number(c.worst_lower_slack) + ")";
}

std::string pricing_source(const Instance& inst) {
    return inst.pricing ? "file" : "maximal risk-neutral family";
}

AdaptedProcess discounted_prices(const Market& market) {
    AdaptedProcess s(market.tree().size());
    s.domain.assign(s.size(), 0);
    for (NodeId n = 0; n < s.size(); ++n) {
        if (!market.before_tau(n)) continue;
        s[n] = market.discounted_price(n);
        s.domain[n] = 1;
    }
    return s;
}

}  // namespace

MeasureFamily pricing_family(const Instance& instance) {
    if (instance.pricing) return *instance.pricing;
    return risk_neutral_family(instance.market, instance.actual);
}

std::vector<double> claim_leaf_payoff(const Market& market, const Claim& claim) {
    const EventTree& tree = market.tree();
    if (claim.maturity < 0 || claim.maturity > tree.horizon()) {
        throw Error(Errc::invalid_input, "maturity must lie in [0, horizon]");
    }
    std::vector<double> out;
    for (NodeId leaf : tree.leaves()) out.push_back(claim_payoff(market, claim, tree.ancestor_at(leaf, claim.maturity)));
    return out;
}

std::vector<double> read_leaf_payoff_file(const std::string& path, const EventTree& tree) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::invalid_input, "cannot open payoff file '" + path + "'");
    std::vector<double> out(tree.leaves().size(), kNaN);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string id, value, extra;
        if (!(fields >> id)) continue;
        const std::string where = path + ":" + std::to_string(number) + ": ";
        if (!(fields >> value) || (fields >> extra)) throw Error(Errc::invalid_input, where + "expected '<leaf> <value>'");
        auto node = tree.find(id);
        if (!node || !tree.is_leaf(*node)) throw Error(Errc::invalid_input, where + "'" + id + "' is not a leaf");
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (*end != '\0' || !std::isfinite(v)) throw Error(Errc::invalid_input, where + "invalid number '" + value + "'");
        double& slot = out[tree.leaf_index(*node)];
        if (!std::isnan(slot)) throw Error(Errc::invalid_input, where + "leaf '" + id + "' given twice");
        slot = v;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (std::isnan(out[i])) {
            throw Error(Errc::invalid_input, path + ": missing payoff for leaf '" + tree.label(tree.leaves()[i]) + "'");
        }
    }
    return out;
}

Report run_analyze(const Instance& inst, double tol) {
    Report r = base_report(inst, "analyze");
    const Market& market = inst.market;
    const EventTree& tree = market.tree();
    const NodeId root = tree.root();
    const MeasureFamily pricing = pricing_family(inst);

    r.add_fact("market", "market", inst.name);
    r.add_fact("tau_kind", "tau kind", to_string(market.tau_kind()));
    r.add_fact("pricing", "pricing family", pricing_source(inst));

    const FtapReport ftap = verify_ftap(market, inst.actual, tol);
    r.add_fact("arbitrage", "arbitrage", ftap.arbitrage ? "FOUND" : "none");
    if (ftap.arbitrage) {
        r.add_fact("arbitrage_witness", "arbitrage witness leaf", tree.label(ftap.arbitrage->witness_leaf));
        r.add_value("arbitrage_witness_gain", "arbitrage witness gain", ftap.arbitrage->witness_gain);
        r.add_verdict({"arbitrage certificate", ftap.certificate_valid, true, "re-evaluated terminal gains", {}});
    }
    r.add_fact("risk_neutral_family", "risk-neutral family",
               ftap.family && ftap.uncovered_leaves.empty()
                   ? "found (" + std::to_string(ftap.family->explicit_form().measures.size()) + " measures)"
                   : "not found");
    r.add_verdict({"ftap dichotomy", ftap.dichotomy_holds, true,
                   "exactly one of arbitrage / full-support supermartingale family",
                   labels(tree, ftap.arbitrage ? std::vector<NodeId>{} : ftap.uncovered_leaves)});

    const AdaptedProcess s_star = fundamental_price(market, pricing);
    const FundamentalWealth fw = fundamental_wealth(market, pricing, tol);
    const AdaptedProcess beta = bubble_process(market, pricing);
    const AdaptedProcess w = wealth_process(market);

    const SublinearExpectation expect(tree, pricing);
    AdaptedProcess beta_all = beta;
    beta_all.domain.clear();
    r.add_value("inf_E_beta_1", "inf E[β₁]", expect.conditional(beta_all, 1, Bound::lower)[root]);
    r.add_value("sup_E_beta_1", "sup E[β₁]", expect.conditional(beta_all, 1, Bound::upper)[root]);
    r.add_value("S_star_0", "S*₀", s_star[root]);
    r.add_value("beta_0", "β₀", beta.defined(root) ? beta[root] : 0.0);
    r.add_value("W_0", "W₀", w[root]);
    r.add_value("W_star_0", "W*₀", fw.w_star[root]);

    const BubbleClassification bc = classify_bubble(market, pricing, inst.actual, beta, tol);
    r.add_fact("bubble", "bubble", bc.exists ? "exists" : "none");
    r.add_fact("bubble_class", "bubble class", describe(bc.bubble_class));
    r.add_fact("price_class", "price class", describe(bc.price_class));
    r.add_fact("wstar_class", "W* class", describe(fw.classification));
    r.add_verdict({"W* G-martingale", fw.is_g_martingale, true,
                   "max |W* - sup E[W*]| = " + format_number(fw.classification.martingale_gap), {}});
    const double identity = bubble_identity_error(market, pricing);
    r.add_verdict({"beta = W - W*", identity <= 1e-12, true, "max deviation " + format_number(identity), {}});
    r.add_verdict(verdict_from("bubble type", bc.beta_type, tree));
    r.add_verdict(verdict_from("price level", bc.price_level, tree));
    r.add_verdict(verdict_from("sufficiency", bc.sufficiency, tree));

    const CorollaryReport cor = check_bubble_properties(market, inst.actual, beta, !ftap.arbitrage, tol);
    r.add_verdict(verdict_from("beta >= 0 under no-arbitrage", cor.nonneg_under_noarb, tree));
    r.add_verdict(verdict_from("beta = 0 at tau", cor.vanishes_at_tau, tree));
    r.add_verdict(verdict_from("zero bubble persists", cor.persistence, tree));

    AdaptedProcess s_hat(tree.size());
    for (NodeId n = 0; n < tree.size(); ++n) s_hat[n] = market.before_tau(n) ? market.discounted_price(n) : 0.0;
    r.add_process("S", s_hat.values);
    r.add_process("Sstar", masked(s_star));
    r.add_process("beta", masked(beta));
    r.add_process("W", w.values);
    r.add_process("Wstar", masked(fw.w_star));
    r.add_process("beta_upper_slack", bc.bubble_class.node_upper_slack);
    r.add_process("beta_lower_slack", bc.bubble_class.node_lower_slack);
    if (market.horizon() >= 1 && !market.infinite_on().empty()) {
        r.diagnostics.push_back("paths without maturity inside the horizon: " +
                                std::to_string(market.infinite_on().size()));
    }
    return r;
}

Report run_price(const Instance& inst, const PriceRequest& req, double tol) {
    Report r = base_report(inst, "price");
    const Market& market = inst.market;
    const EventTree& tree = market.tree();
    const NodeId root = tree.root();
    const MeasureFamily pricing = pricing_family(inst);
    Claim claim;
    claim.kind = req.kind;
    claim.strike = req.strike;
    claim.maturity = req.maturity < 0 ? tree.horizon() : req.maturity;
    r.args = {"--claim", to_string(claim.kind), "--strike", format_number(claim.strike), "--maturity",
              std::to_string(claim.maturity)};
    r.add_fact("pricing", "pricing family", pricing_source(inst));

    if (claim.kind == ClaimKind::amer_call || claim.kind == ClaimKind::amer_put) {
        if (pricing.is_rectangular()) {
            const AmericanPrice ap = american_fundamental_price(market, pricing, claim);
            r.add_fact("method", "method", "backward induction");
            r.add_value("price", "price", ap.value[root]);
            r.add_process("value", masked(ap.value));
            r.add_process("continuation", masked(ap.continuation));
            std::vector<double> region(tree.size(), kNaN);
            for (NodeId n = 0; n < tree.size(); ++n) {
                if (ap.value.defined(n)) region[n] = ap.exercise[n];
            }
            r.add_process("exercise", region);
        } else {
            r.add_fact("method", "method", "stopping-rule enumeration");
            r.add_value("price", "price", american_oracle(market, pricing, claim));
        }
        if (claim.kind == ClaimKind::amer_call) {
            const AmericanBounds ab = american_bounds(market, pricing, inst.quotes, claim.strike, claim.maturity, tol);
            std::vector<NodeId> bad;
            for (const auto& row : ab.rows) {
                if (!row.lower_holds || !row.upper_holds) bad.push_back(row.node);
            }
            r.add_verdict({"C^E* <= C^A* <= C^E* + δ^S", ab.fundamental_holds, true, "fundamental chain",
                           labels(tree, bad)});
            if (ab.market_checked) {
                std::vector<NodeId> mbad;
                for (const auto& row : ab.market_rows) {
                    if (!row.holds) mbad.push_back(row.node);
                }
                r.add_verdict({"market American chain", ab.market_holds, true, "quoted prices", labels(tree, mbad)});
            }
        }
        return r;
    }

    const AdaptedProcess value = fundamental_claim_price(market, pricing, claim);
    r.add_fact("method", "method", "sublinear expectation");
    r.add_value("price", "price", value[root]);
    r.add_process("value", masked(value));
    if (claim.kind != ClaimKind::custom_terminal) {
        const ParityBounds pb = parity_bounds(market, pricing, claim.strike, claim.maturity, tol);
        for (const auto& row : pb.rows) {
            if (row.node != root) continue;
            r.add_value("parity_lower", "inf E[S_T - K]", row.lower);
            r.add_value("parity_spread", "C* - P*", row.spread);
            r.add_value("parity_upper", "F*", row.upper);
        }
        std::vector<NodeId> bad;
        for (const auto& row : pb.rows) {
            if (!row.holds) bad.push_back(row.node);
        }
        r.add_verdict({"parity sandwich", pb.holds, true, "inf E[S_T - K] <= C* - P* <= F*", labels(tree, bad)});
    }
    const bool quoted = inst.quotes.values.count(QuoteKind::call) && inst.quotes.values.count(QuoteKind::put);
    if (quoted) {
        const MarketParity mp = market_parity(market, pricing, inst.quotes, claim.strike, claim.maturity,
                                              req.no_dominance, tol);
        std::vector<NodeId> bad;
        for (const auto& row : mp.rows) {
            if (std::abs(row.deviation) > tol) bad.push_back(row.node);
        }
        r.add_verdict({"market parity C - P = F", mp.holds, mp.enforced,
                       mp.enforced ? "no-dominance assumed" : "informational", labels(tree, bad)});
        const ClaimBubbles cb = claim_bubbles(market, pricing, inst.quotes, claim.strike, claim.maturity, tol);
        std::vector<NodeId> cbad;
        for (const auto& row : cb.rows) {
            if (row.node == root) {
                r.add_value("delta_S", "δ^S", row.delta_s);
                r.add_value("delta_F", "δ^F", row.delta_f);
                r.add_value("delta_EC", "δ^EC", row.delta_ec);
                r.add_value("delta_EP", "δ^EP", row.delta_ep);
            }
            if (!row.holds) cbad.push_back(row.node);
        }
        r.add_verdict({"δ^S = δ^F <= δ^EC - δ^EP", cb.holds, req.no_dominance,
                       req.no_dominance ? "no-dominance assumed" : "informational", labels(tree, cbad)});
    }
    return r;
}

Report run_hedge(const Instance& inst, const std::vector<double>& payoff, const std::string& description,
                 double tol) {
    Report r = base_report(inst, "hedge");
    r.args = {"--payoff", description};
    const Market& market = inst.market;
    const EventTree& tree = market.tree();
    const MeasureFamily pricing = pricing_family(inst);
    r.add_fact("pricing", "pricing family", pricing_source(inst));
    const HedgeSolution hedge = superhedge(market, inst.actual, payoff);
    const RobustPrice rp = robust_price(market, pricing, inst.actual, payoff, tol);
    r.add_value("price", "superhedging price", hedge.price);
    r.add_value("robust_value", "sup E[payoff]", rp.value);
    r.add_value("duality_gap", "duality gap", rp.duality_gap);
    double worst = std::numeric_limits<double>::infinity();
    std::vector<NodeId> bad;
    for (std::size_t i = 0; i < hedge.leaf_slack.size(); ++i) {
        if (std::isnan(hedge.leaf_slack[i])) continue;
        worst = std::min(worst, hedge.leaf_slack[i]);
        if (hedge.leaf_slack[i] < -tol) bad.push_back(tree.leaves()[i]);
    }
    r.add_verdict({"superhedge dominates payoff", bad.empty(), true, "min slack " + format_number(worst),
                   labels(tree, bad)});
    r.add_verdict({"duality gap <= 1e-6", rp.duality_gap <= 1e-6, !inst.pricing,
                   inst.pricing ? "pricing family from file; gap is informational" : "maximal family", {}});
    std::vector<double> holding(tree.size(), kNaN);
    for (NodeId n = 0; n < tree.size(); ++n) {
        if (!tree.is_leaf(n)) holding[n] = hedge.strategy.holding[n];
    }
    r.add_process("holding", holding);
    return r;
}

Report run_classify(const Instance& inst, const std::string& process, double tol) {
    Report r = base_report(inst, "classify");
    r.args = {"--process", process};
    const Market& market = inst.market;
    const EventTree& tree = market.tree();
    const MeasureFamily pricing = pricing_family(inst);
    AdaptedProcess x;
    if (process == "S") {
        x = discounted_prices(market);
    } else if (process == "W") {
        x = wealth_process(market);
    } else if (process == "Wstar") {
        x = fundamental_wealth(market, pricing, tol).w_star;
    } else if (process == "beta") {
        x = bubble_process(market, pricing);
    } else {
        throw Error(Errc::invalid_input, "unknown process '" + process + "' (expected S, W, Wstar or beta)");
    }
    const Classification c = classify_process(tree, pricing, x, tree.horizon(), tol);
    r.add_fact("pricing", "pricing family", pricing_source(inst));
    r.add_fact("class", "class", to_string(c.cls));
    r.add_value("worst_upper_slack", "worst upper slack", c.worst_upper_slack);
    r.add_value("worst_lower_slack", "worst lower slack", c.worst_lower_slack);
    r.add_value("martingale_gap", "martingale gap", c.martingale_gap);
    r.add_value("checks", "checks", static_cast<double>(c.checks));
    if (c.checks > 0) r.add_fact("worst_node", "worst node", tree.label(c.worst_node));
    r.add_process(process, masked(x));
    r.add_process("upper_slack", c.node_upper_slack);
    r.add_process("lower_slack", c.node_lower_slack);
    return r;
}

Report run_dominance(const Instance& inst, double tol) {
    Report r = base_report(inst, "dominance");
    const Market& market = inst.market;
    const EventTree& tree = market.tree();
    if (find_arbitrage(market, inst.actual)) {
        throw Error(Errc::arbitrage, "dominance analysis requires a market without arbitrage");
    }
    const MeasureFamily pricing = pricing_family(inst);
    r.add_fact("pricing", "pricing family", pricing_source(inst));
    const auto dom = find_dominating_strategy(market, pricing, inst.actual, tol);
    r.add_fact("dominance", "dominance", dom ? "FOUND" : "none");
    const NodeId root = tree.root();
    r.add_value("root_price", "S₀", market.before_tau(root) ? market.discounted_price(root) : 0.0);
    r.add_value("S_star_0", "S*₀", fundamental_price(market, pricing)[root]);
    if (dom) {
        r.add_value("hedge_cost", "hedge cost", dom->hedge_cost);
        r.add_value("min_gain_gap", "min gain gap", dom->min_gap);
        r.add_fact("strict_leaf", "strict leaf", tree.label(dom->strict_leaf));
        std::vector<double> holding(tree.size(), kNaN);
        for (NodeId n = 0; n < tree.size(); ++n) {
            if (!tree.is_leaf(n)) holding[n] = dom->hedge.strategy.holding[n];
        }
        r.add_process("holding", holding);
    }
    return r;
}

}  // namespace bubbletree
