#include <gtest/gtest.h>

#include "bubbletree/fixtures.hpp"
#include "bubbletree/lattice.hpp"
#include "bubbletree/market_file.hpp"
#include "oracles.hpp"

using namespace bubbletree;

namespace {

MarketSpec two_period_spec() {
    MarketSpec s;
    s.tree = EventTree({{"r", "", 0}, {"a", "r", 1}, {"b", "r", 1}, {"aa", "a", 2}, {"ab", "a", 2}, {"bb", "b", 2}},
                       2);
    const std::size_t n = s.tree.size();
    s.rate.assign(n, 0.0);
    s.price = {1.0, 1.2, 0.8, 1.5, 1.0, 0.6};
    s.dividend.assign(n, 0.0);
    return s;
}

}  // namespace

TEST(EventTree, StructureQueries) {
    const MarketSpec s = two_period_spec();
    const EventTree& t = s.tree;
    EXPECT_EQ(t.size(), 6u);
    EXPECT_EQ(t.root(), *t.find("r"));
    EXPECT_EQ(t.leaves().size(), 3u);
    EXPECT_EQ(t.ancestor_at(*t.find("ab"), 1), *t.find("a"));
    EXPECT_TRUE(t.is_ancestor_or_self(*t.find("a"), *t.find("ab")));
    EXPECT_FALSE(t.is_ancestor_or_self(*t.find("b"), *t.find("ab")));
    EXPECT_EQ(t.leaves_below(*t.find("a")).size(), 2u);
    EXPECT_EQ(t.path_to(*t.find("bb")).front(), t.root());
    const auto& order = t.backward_order();
    for (std::size_t i = 1; i < order.size(); ++i) EXPECT_GE(t.time(order[i - 1]), t.time(order[i]));
}

TEST(Validation, ValidSpecPasses) { EXPECT_TRUE(validate_market(two_period_spec()).ok()); }

TEST(Validation, ReportsTimeMismatchAndDepth) {
    MarketSpec s = two_period_spec();
    s.tree = EventTree({{"r", "", 0}, {"a", "r", 2}, {"b", "r", 1}}, 1);
    s.rate.assign(3, 0.0);
    s.price.assign(3, 1.0);
    s.dividend.assign(3, 0.0);
    const ValidationReport rep = validate_market(s);
    EXPECT_TRUE(rep.has("time must equal parent time + 1"));
    EXPECT_TRUE(rep.has("non-uniform depth"));
}

TEST(Validation, NegativePriceNamesNode) {
    MarketSpec s = two_period_spec();
    s.price[2] = -0.1;
    const ValidationReport rep = validate_market(s);
    ASSERT_FALSE(rep.ok());
    EXPECT_NE(rep.summary().find("b"), std::string::npos);
}

TEST(Validation, TauKindMustMatchPaths) {
    MarketSpec s = two_period_spec();
    s.tau.nodes = {*s.tree.find("a")};
    s.payoff[*s.tree.find("a")] = 1.0;
    s.tau_kind = TauKind::bounded;
    EXPECT_TRUE(validate_market(s).has("bounded tau requires every path to reach a tau node"));
    s.tau_kind = TauKind::possibly_infinite;
    EXPECT_TRUE(validate_market(s).ok());
}

TEST(Validation, TauNodesFormAntichain) {
    MarketSpec s = two_period_spec();
    s.tau.nodes = {*s.tree.find("a"), *s.tree.find("aa")};
    s.payoff[*s.tree.find("a")] = 1.0;
    s.payoff[*s.tree.find("aa")] = 1.0;
    EXPECT_TRUE(validate_market(s).has("tau nodes must form an antichain"));
}

TEST(Market, InvalidSpecThrows) {
    MarketSpec s = two_period_spec();
    s.price[1] = std::nan("");
    EXPECT_THROW(Market{s}, Error);
}

TEST(Market, DiscountingAndWealthMatchOracle) {
    MarketSpec s = two_period_spec();
    s.rate = {0.05, 0.02, 0.0, 0, 0, 0};
    s.dividend = {0.0, 0.1, 0.0, 0.0, 0.2, 0.0};
    s.tau.nodes = {*s.tree.find("ab")};
    s.payoff[*s.tree.find("ab")] = 0.9;
    const Market m(s);
    EXPECT_DOUBLE_EQ(m.discount(*s.tree.find("aa")), 1.05 * 1.02);
    const AdaptedProcess w = wealth_process(m);
    const auto ref = oracle::wealth(m);
    for (NodeId n = 0; n < w.size(); ++n) EXPECT_NEAR(w[n], ref[n], 1e-15) << s.tree.label(n);
    const NodeId ab = *s.tree.find("ab");
    EXPECT_TRUE(m.is_tau(ab));
    EXPECT_NEAR(w[ab], 0.1 / 1.05 + (0.2 + 0.9) / (1.05 * 1.02), 1e-15);
}

TEST(Market, InfiniteOnListsPathsWithoutTau) {
    const Instance inst = fixtures::ex1_one_period();
    EXPECT_EQ(inst.market.infinite_on().size(), 2u);
    EXPECT_TRUE(fixtures::ex1().market.infinite_on().empty());
}

TEST(Gains, NegativeHoldingRejected) {
    const Market m(two_period_spec());
    Strategy s{std::vector<double>(m.tree().size(), 1.0)};
    s.holding[0] = -0.5;
    try {
        gains_process(m, s);
        FAIL() << "expected a constraint violation";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::constraint_violation);
    }
}

TEST(Gains, TerminalGainsMatchPathSums) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        fixtures::RandomOptions opt;
        opt.dividends = true;
        opt.rates = true;
        const Instance inst = fixtures::random_instance(seed, opt);
        std::mt19937_64 rng(seed);
        std::vector<double> h = oracle::random_payoff(rng, inst.market.tree().size(), 0.0, 2.0);
        const auto got = terminal_gains(inst.market, Strategy{h});
        const auto ref = oracle::path_gains(inst.market, h);
        ASSERT_EQ(got.size(), ref.size());
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], ref[i], 1e-12);
    }
}

TEST(Gains, BuyAndHoldIsSelfFinancing) {
    const Instance inst = fixtures::ex1();
    Strategy hold{std::vector<double>(inst.market.tree().size(), 1.0)};
    const GainsResult g = gains_process(inst.market, hold);
    EXPECT_TRUE(g.self_financing);
    const AdaptedProcess w = wealth_process(inst.market);
    for (NodeId n = 0; n < w.size(); ++n) EXPECT_NEAR(g.gains[n], w[n] - w[0], 1e-15);
}
