#include <gtest/gtest.h>

#include <cmath>

#include "bubbletree/claims.hpp"
#include "bubbletree/fixtures.hpp"
#include "bubbletree/market_file.hpp"
#include "bubbletree/noarb.hpp"
#include "oracles.hpp"

using namespace bubbletree;

namespace {

// Full binomial tree with S = s0 u^k d^(t-k) and a single-point family.
Instance binomial(int periods, double s0, double up, double down, double p, double rate = 0.0) {
    std::string text = "name binomial\nhorizon " + std::to_string(periods) + "\n";
    std::vector<std::pair<std::string, int>> level = {{"s", 0}};
    std::vector<std::string> internal;
    text += "node s - 0\n";
    std::string prices = "price s " + std::to_string(s0) + "\n";
    for (int t = 1; t <= periods; ++t) {
        std::vector<std::pair<std::string, int>> next;
        for (const auto& [id, ups] : level) {
            internal.push_back(id);
            for (int up_move : {1, 0}) {
                const std::string child = id + (up_move ? "u" : "d");
                const int k = ups + up_move;
                text += "node " + child + " " + id + " " + std::to_string(t) + "\n";
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g", s0 * std::pow(up, k) * std::pow(down, t - k));
                prices += "price " + child + " " + buf + "\n";
                next.push_back({child, k});
            }
        }
        level = next;
    }
    text += prices;
    text += "rate * " + std::to_string(rate) + "\n";
    std::string boxes;
    for (const std::string& id : internal) {
        char box[160];
        std::snprintf(box, sizeof box, "  bounds %s %.17g %.17g %.17g %.17g\n", id.c_str(), p, p, 1 - p, 1 - p);
        boxes += box;
    }
    text += "family actual rectangular\n" + boxes + "end\n";
    text += "family pricing rectangular\n" + boxes + "end\n";
    return parse_market_text(text);
}

double crr(int n, double s0, double up, double down, double p, double K, bool call, double rate) {
    double v = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double binom = std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0));
        const double s = s0 * std::pow(up, k) * std::pow(down, n - k);
        v += binom * std::pow(p, k) * std::pow(1 - p, n - k) * std::max(call ? s - K : K - s, 0.0);
    }
    return v / std::pow(1.0 + rate, n);
}

}  // namespace

TEST(EuropeanClaims, OnePeriodCallByEndpoints) {
    const Instance inst = fixtures::ex1_one_period(0.2, 0.4);
    const Claim call{ClaimKind::euro_call, 1.0, 1, {}};
    // endpoint enumeration: theta in {0.2, 0.4}, payoff 0.5 theta
    const double expected = std::max(0.2 * 0.5, 0.4 * 0.5);
    EXPECT_NEAR(fundamental_claim_price(inst.market, *inst.pricing, call)[0], expected, 1e-12);
}

TEST(EuropeanClaims, SingletonFamilyMatchesCoxRossRubinstein) {
    const double r = 0.01, up = 1.1, down = 0.92;
    const double p = (1 + r - down) / (up - down);
    const Instance inst = binomial(5, 1.0, up, down, p, r);
    for (double K : {0.8, 1.0, 1.2}) {
        const Claim call{ClaimKind::euro_call, K, 5, {}};
        const Claim put{ClaimKind::euro_put, K, 5, {}};
        EXPECT_NEAR(fundamental_claim_price(inst.market, *inst.pricing, call)[0], crr(5, 1, up, down, p, K, true, r),
                    1e-12);
        EXPECT_NEAR(fundamental_claim_price(inst.market, *inst.pricing, put)[0], crr(5, 1, up, down, p, K, false, r),
                    1e-12);
    }
}

TEST(EuropeanClaims, AmericanKindsRejected) {
    const Instance inst = fixtures::ex1_one_period();
    EXPECT_THROW(fundamental_claim_price(inst.market, *inst.pricing, Claim{ClaimKind::amer_call, 1.0, 1, {}}),
                 Error);
}

TEST(EuropeanClaims, MonotoneAndConvexInStrike) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        fixtures::RandomOptions opt;
        opt.tau = fixtures::TauMode::none;
        const Instance inst = fixtures::random_instance(seed + 1500, opt);
        const MeasureFamily q = fixtures::random_box_family(inst.market.tree(), seed, FamilyRole::pricing);
        const int T = inst.market.horizon();
        auto price = [&](ClaimKind kind, double K) {
            return fundamental_claim_price(inst.market, q, Claim{kind, K, T, {}})[0];
        };
        for (double K = 0.2; K < 1.5; K += 0.1) {
            EXPECT_GE(price(ClaimKind::euro_call, K) + 1e-12, price(ClaimKind::euro_call, K + 0.1));
            EXPECT_LE(price(ClaimKind::euro_put, K), price(ClaimKind::euro_put, K + 0.1) + 1e-12);
            EXPECT_LE(2 * price(ClaimKind::euro_call, K + 0.1),
                      price(ClaimKind::euro_call, K) + price(ClaimKind::euro_call, K + 0.2) + 1e-12);
        }
    }
}

TEST(Assumptions, DividendBeforeMaturityRejected) {
    fixtures::RandomOptions opt;
    opt.dividends = true;
    opt.tau = fixtures::TauMode::none;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const Instance inst = fixtures::random_instance(seed, opt);
        if (!inst.market.pays_dividends()) continue;
        const MeasureFamily q = fixtures::random_box_family(inst.market.tree(), seed, FamilyRole::pricing);
        try {
            check_claim_assumptions(inst.market, q, Claim{ClaimKind::euro_call, 1.0, inst.market.horizon(), {}});
            FAIL() << "expected assumption_violation";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::assumption_violation);
        }
        return;
    }
    FAIL() << "no dividend-paying instance drawn";
}

TEST(Parity, SandwichAndSingletonEquality) {
    const Instance inst = fixtures::ex1_one_period(0.2, 0.4);
    const ParityBounds pb = parity_bounds(inst.market, *inst.pricing, 1.0, 1);
    ASSERT_FALSE(pb.rows.empty());
    const ParityRow& root = pb.rows.front();
    EXPECT_NEAR(root.lower, -0.3, 1e-12);
    EXPECT_NEAR(root.spread, 0.2 - 0.4, 1e-12);
    EXPECT_NEAR(root.upper, -0.1, 1e-12);
    EXPECT_TRUE(pb.holds);

    const MeasureFamily point =
        fixtures::random_point_family(inst.market.tree(), 4, FamilyRole::pricing);
    const ParityBounds eq = parity_bounds(inst.market, point, 1.0, 1);
    EXPECT_NEAR(eq.rows.front().lower, eq.rows.front().upper, 1e-12);
    EXPECT_NEAR(eq.rows.front().spread, eq.rows.front().upper, 1e-12);
}

TEST(MarketQuotes, ParityAndClaimBubbles) {
    Instance inst = fixtures::ex1_one_period(0.2, 0.4);
    const NodeId root = inst.market.tree().root();
    EXPECT_THROW(market_parity(inst.market, *inst.pricing, inst.quotes, 1.0, 1, true), Error);
    inst.quotes.values[QuoteKind::call][root] = 0.3;
    inst.quotes.values[QuoteKind::put][root] = 0.3;
    const MarketParity mp = market_parity(inst.market, *inst.pricing, inst.quotes, 1.0, 1, true);
    EXPECT_TRUE(mp.enforced);
    EXPECT_TRUE(mp.holds);
    const ClaimBubbles cb = claim_bubbles(inst.market, *inst.pricing, inst.quotes, 1.0, 1);
    ASSERT_EQ(cb.rows.size(), 1u);
    EXPECT_NEAR(cb.rows[0].delta_s, 0.1, 1e-12);
    EXPECT_NEAR(cb.rows[0].delta_f, 0.1, 1e-12);
    EXPECT_NEAR(cb.rows[0].delta_ec, 0.1, 1e-12);
    EXPECT_NEAR(cb.rows[0].delta_ep, -0.1, 1e-12);
    EXPECT_TRUE(cb.holds);

    inst.quotes.values[QuoteKind::put][root] = 0.5;
    EXPECT_FALSE(market_parity(inst.market, *inst.pricing, inst.quotes, 1.0, 1, true).holds);
    EXPECT_TRUE(market_parity(inst.market, *inst.pricing, inst.quotes, 1.0, 1, false).holds);
}

TEST(American, BinomialPutMatchesSnellEnvelope) {
    const double r = 0.02, up = 1.15, down = 0.9;
    const double p = (1 + r - down) / (up - down);
    const Instance inst = binomial(4, 1.0, up, down, p, r);
    const Claim put{ClaimKind::amer_put, 1.05, 4, {}};
    const AmericanPrice ap = american_fundamental_price(inst.market, *inst.pricing, put);
    // classical Snell envelope in nominal units
    std::vector<double> v(5);
    for (int k = 0; k <= 4; ++k) v[k] = std::max(1.05 - std::pow(up, k) * std::pow(down, 4 - k), 0.0);
    for (int t = 3; t >= 0; --t) {
        for (int k = 0; k <= t; ++k) {
            const double cont = (p * v[k + 1] + (1 - p) * v[k]) / (1 + r);
            v[k] = std::max(1.05 - std::pow(up, k) * std::pow(down, t - k), cont);
        }
    }
    EXPECT_NEAR(ap.value[0], v[0], 1e-12);
    const Claim euro{ClaimKind::euro_put, 1.05, 4, {}};
    EXPECT_GT(ap.value[0], fundamental_claim_price(inst.market, *inst.pricing, euro)[0]);
}

TEST(American, ExerciseRegionConsistency) {
    const Instance inst = fixtures::random_instance(42, {3, 3, true, false, false, fixtures::TauMode::none, 0.01});
    const MeasureFamily q = risk_neutral_family(inst.market, inst.actual);
    const Claim call{ClaimKind::amer_call, inst.market.spec().price[0] * 0.9, inst.market.horizon(), {}};
    const AmericanPrice ap = american_fundamental_price(inst.market, q, call);
    for (NodeId n = 0; n < inst.market.tree().size(); ++n) {
        if (!ap.value.defined(n)) continue;
        const double payoff = claim_payoff(inst.market, call, n);
        if (ap.exercise[n]) {
            EXPECT_NEAR(ap.value[n], payoff, 1e-12);
        } else {
            EXPECT_NEAR(ap.value[n], ap.continuation[n], 1e-12);
        }
    }
}

TEST(American, DynamicProgrammingMatchesEnumeration) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        fixtures::RandomOptions opt;
        opt.max_depth = 3;
        opt.tau = fixtures::TauMode::none;
        const Instance inst = fixtures::random_instance(seed + 2500, opt);
        const Market& m = inst.market;
        const MeasureFamily q = fixtures::random_box_family(m.tree(), seed, FamilyRole::pricing);
        const Claim put{ClaimKind::amer_put, m.spec().price[0], m.horizon(), {}};
        const double dp = american_fundamental_price(m, q, put).value[0];
        EXPECT_NEAR(dp, american_oracle(m, q, put), 1e-9);
        EXPECT_NEAR(dp,
                    oracle::american_value(m.tree(), q, [&](NodeId n) { return claim_payoff(m, put, n); },
                                           m.horizon()),
                    1e-9);
    }
}

TEST(American, RectangularityRequired) {
    const Instance inst = fixtures::ex1_one_period();
    const MeasureFamily q(ExplicitFamily{{{0.5, 0.5}, {0.2, 0.8}}}, FamilyRole::pricing);
    const Claim call{ClaimKind::amer_call, 0.9, 1, {}};
    try {
        american_fundamental_price(inst.market, q, call);
        FAIL() << "expected rectangularity_required";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::rectangularity_required);
    }
    EXPECT_NEAR(american_oracle(inst.market, q, call), std::max(0.1, 0.5 * 0.6), 1e-12);
}

TEST(American, StoppingRuleCount) {
    std::vector<NodeSpec> nodes = {{"r", "", 0}};
    for (int t = 1; t <= 3; ++t) {
        const std::size_t end = nodes.size();
        for (std::size_t i = 0; i < end; ++i) {
            if (nodes[i].time != t - 1) continue;
            for (int c = 0; c < 3; ++c) nodes.push_back({nodes[i].id + std::to_string(c), nodes[i].id, t});
        }
    }
    const EventTree tree(nodes, 3);
    EXPECT_EQ(stopping_rule_count(tree, 3), 730.0);
    EXPECT_EQ(stopping_rule_count(tree, 1), 2.0);
}

TEST(American, OracleCapEnforced) {
    const Instance inst = fixtures::fiat(8);
    const Claim call{ClaimKind::amer_call, 0.5, 8, {}};
    try {
        american_oracle(inst.market, *inst.pricing, call, 1000);
        FAIL() << "expected cap_exceeded";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::cap_exceeded);
    }
}

TEST(American, FundamentalChainWithoutAssetBubble) {
    // singleton supermartingale families make delta^S vanish and squeeze C^A* onto C^E*
    const double up = 1.1, down = 0.95;
    const double p = (1 - down) / (up - down);
    const Instance inst = binomial(3, 1.0, up, down, p);
    const AmericanBounds ab = american_bounds(inst.market, *inst.pricing, MarketQuotes{}, 1.0, 3);
    EXPECT_TRUE(ab.fundamental_holds);
    for (const auto& row : ab.rows) {
        EXPECT_NEAR(row.delta_s, 0.0, 1e-12);
        EXPECT_NEAR(row.amer, row.euro, 1e-12);
    }
}
