#include <gtest/gtest.h>

#include "bubbletree/bubble.hpp"
#include "bubbletree/fixtures.hpp"
#include "bubbletree/market_file.hpp"
#include "oracles.hpp"

using namespace bubbletree;

namespace {

double at_root(const Instance& inst, const AdaptedProcess& x, int t, Bound b) {
    AdaptedProcess all = x;
    all.domain.clear();
    return SublinearExpectation(inst.market.tree(), *inst.pricing).at(all, t, inst.market.tree().root(), b);
}

}  // namespace

TEST(Bubble, Ex1Values) {
    const Instance inst = fixtures::ex1();
    const MeasureFamily& q = *inst.pricing;
    const EventTree& tree = inst.market.tree();
    const AdaptedProcess s_star = fundamental_price(inst.market, q);
    const AdaptedProcess beta = bubble_process(inst.market, q);
    EXPECT_NEAR(s_star[tree.root()], 1.0, 1e-12);
    EXPECT_NEAR(beta[*tree.find("u")], 0.5, 1e-12);
    EXPECT_NEAR(beta[*tree.find("d")], -0.5, 1e-12);
    EXPECT_FALSE(beta.defined(*tree.find("uu")));
    EXPECT_NEAR(at_root(inst, beta, 1, Bound::lower), -0.3, 1e-12);
    EXPECT_NEAR(at_root(fixtures::ex2(), bubble_process(fixtures::ex2().market, *fixtures::ex2().pricing), 1,
                        Bound::lower),
                0.0, 1e-12);
}

TEST(Bubble, Ex3SupExpectation) {
    const Instance a = fixtures::ex3(0.4);
    EXPECT_NEAR(at_root(a, bubble_process(a.market, *a.pricing), 1, Bound::upper), -0.1, 1e-12);
    const Instance b = fixtures::ex3(0.5);
    EXPECT_NEAR(at_root(b, bubble_process(b.market, *b.pricing), 1, Bound::upper), 0.0, 1e-12);
}

TEST(Bubble, FiatMoneyIsAllBubble) {
    const Instance inst = fixtures::fiat(6);
    const EventTree& tree = inst.market.tree();
    const AdaptedProcess s_star = fundamental_price(inst.market, *inst.pricing);
    const AdaptedProcess beta = bubble_process(inst.market, *inst.pricing);
    for (NodeId n = 0; n < tree.size(); ++n) {
        EXPECT_EQ(s_star[n], 0.0);
        EXPECT_NEAR(beta[n], inst.market.discounted_price(n), 1e-15);
    }
    EXPECT_TRUE(bubble_exists(inst.market, beta, inst.actual));
}

TEST(Bubble, IdentityAgainstOracle) {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        fixtures::RandomOptions opt;
        opt.dividends = seed % 2 == 0;
        opt.rates = seed % 3 == 0;
        const Instance inst = fixtures::random_instance(seed + 300, opt);
        const MeasureFamily q = risk_neutral_family(inst.market, inst.actual);
        const EventTree& tree = inst.market.tree();
        const AdaptedProcess beta = bubble_process(inst.market, q);
        const auto z = oracle::cash_flows(inst.market);
        const auto w = oracle::wealth(inst.market);
        const auto w_star = oracle::conditional(tree, q, z, tree.horizon(), Bound::upper);
        for (NodeId n = 0; n < tree.size(); ++n) {
            if (!inst.market.before_tau(n)) continue;
            EXPECT_NEAR(beta[n], w[n] - w_star[n], 1e-12);
        }
        EXPECT_LE(bubble_identity_error(inst.market, q), 1e-12);
    }
}

TEST(Bubble, FundamentalWealthIsMartingale) {
    const Instance inst = fixtures::ex1_one_period();
    const FundamentalWealth fw = fundamental_wealth(inst.market, *inst.pricing);
    EXPECT_TRUE(fw.is_g_martingale);
    EXPECT_EQ(fw.classification.cls, MartingaleClass::g_martingale);
}

TEST(Bubble, ExplicitPolarNodesLeaveDomain) {
    const Instance base = fixtures::ex1_one_period();
    const MeasureFamily q(ExplicitFamily{{{0.0, 1.0}}}, FamilyRole::pricing);
    const AdaptedProcess s_star = fundamental_price(base.market, q);
    EXPECT_FALSE(s_star.defined(*base.market.tree().find("u")));
    EXPECT_TRUE(s_star.defined(*base.market.tree().find("d")));
}

TEST(Classification, Ex1Bubble) {
    const Instance inst = fixtures::ex1();
    const AdaptedProcess beta = bubble_process(inst.market, *inst.pricing);
    const BubbleClassification bc = classify_bubble(inst.market, *inst.pricing, inst.actual, beta);
    EXPECT_TRUE(bc.exists);
    EXPECT_TRUE(bc.beta_type.holds);
    EXPECT_TRUE(bc.bubble_class.at_least(MartingaleClass::infi_supermartingale));
}

TEST(Corollaries, VanishAtTauAndNonnegative) {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        fixtures::RandomOptions opt;
        opt.tau = fixtures::TauMode::leaves;
        const Instance inst = fixtures::random_instance(seed + 500, opt);
        const MeasureFamily q = risk_neutral_family(inst.market, inst.actual);
        const AdaptedProcess beta = bubble_process(inst.market, q);
        const CorollaryReport rep = check_bubble_properties(inst.market, inst.actual, beta, true);
        EXPECT_TRUE(rep.vanishes_at_tau.holds);
        EXPECT_TRUE(rep.nonneg_under_noarb.holds);
    }
}

TEST(Corollaries, NonnegativityNotApplicableUnderArbitrage) {
    const Instance inst = fixtures::ex1();
    const AdaptedProcess beta = bubble_process(inst.market, *inst.pricing);
    const CorollaryReport rep = check_bubble_properties(inst.market, inst.actual, beta, false);
    EXPECT_FALSE(rep.nonneg_under_noarb.applicable);
}

TEST(Corollaries, ZeroBubbleCanReappearUnderBoundedMaturity) {
    // beta_0 = 0 but beta(d) = 0.2 under the largest risk-neutral family
    const char* text = R"(name reappear
horizon 2
tau_kind bounded
node r - 0
node u r 1
node d r 1
node uu u 2
node dd d 2
price r 1
price u 1
price d 0.8
tau uu 1
tau dd 0.6
family actual rectangular
  bounds r 0.3 0.7 0.3 0.7
end
)";
    const Instance inst = parse_market_text(text);
    const MeasureFamily q = risk_neutral_family(inst.market, inst.actual);
    const AdaptedProcess beta = bubble_process(inst.market, q);
    const EventTree& tree = inst.market.tree();
    EXPECT_NEAR(beta[tree.root()], 0.0, 1e-12);
    EXPECT_NEAR(beta[*tree.find("d")], 0.2, 1e-12);
    const CorollaryReport rep = check_bubble_properties(inst.market, inst.actual, beta, true);
    EXPECT_TRUE(rep.persistence.applicable);
    EXPECT_FALSE(rep.persistence.holds);
    ASSERT_EQ(rep.persistence.nodes.size(), 1u);
    EXPECT_EQ(tree.label(rep.persistence.nodes[0]), "d");
}

TEST(Dominance, OverpricedAsset) {
    const Instance inst = fixtures::overpriced();
    const MeasureFamily q = risk_neutral_family(inst.market, inst.actual);
    const auto dom = find_dominating_strategy(inst.market, q, inst.actual);
    ASSERT_TRUE(dom.has_value());
    EXPECT_NEAR(dom->hedge_cost, 0.9, 1e-9);
    EXPECT_NEAR(dom->fundamental_root, 0.9, 1e-12);
    EXPECT_GE(dom->min_gap, -1e-9);
}

TEST(Dominance, NoneWithoutBubble) {
    const Instance inst = fixtures::ex1_one_period();
    const MeasureFamily q = risk_neutral_family(inst.market, inst.actual);
    EXPECT_FALSE(find_dominating_strategy(inst.market, q, inst.actual).has_value());
}
