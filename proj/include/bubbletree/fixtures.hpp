#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bubbletree/ambiguity.hpp"
#include "bubbletree/claims.hpp"
#include "bubbletree/lattice.hpp"

namespace bubbletree {

/// A market together with its measure families and optional quotes; this is
/// also what a market file parses into.
struct Instance {
    std::string name;
    Market market;
    MeasureFamily actual;
    std::optional<MeasureFamily> pricing;
    MarketQuotes quotes;
};

namespace fixtures {

/// Two periods: root -> u (S = 1.5), d (S = 0.5), one child each, unit
/// payoff at t = 2, r = 0, S_0 = 1, P(u) in [lo, hi] for both families.
Instance ex1(double lo = 0.2, double hi = 0.4);
Instance ex2();
/// EX1 with the bounded-tau flag.
Instance ex3(double hi = 0.4);
/// One period with the EX1 prices and no maturity inside the horizon.
Instance ex1_one_period(double lo = 0.2, double hi = 0.4);

/// Fiat money: S = 1/P, P_{t+1} = P_t Y with Y in {y_lo, y_hi}, transition
/// probability unconstrained, no maturity. The first child takes y_lo.
Instance fiat(int periods = 10, double y_lo = 0.98, double y_hi = 1.03);

/// One period, S_0 = 1.2, maturity at both leaves paying 0.9 and 0.6.
Instance overpriced();

enum class TauMode { none, leaves, random };

struct RandomOptions {
    int max_depth = 4;
    int max_branching = 3;
    bool no_arbitrage = true;
    bool dividends = false;
    bool rates = false;
    TauMode tau = TauMode::random;
    double price_tick = 0.01;  // wealth values are rounded to this grid, 0 disables
};

/// Seeded random market with a rectangular interval family for `actual` and
/// no pricing family.
Instance random_instance(std::uint64_t seed, const RandomOptions& options = {});

/// Random rectangular interval family on a tree (every box charges every child).
MeasureFamily random_box_family(const EventTree& tree, std::uint64_t seed, FamilyRole role,
                                double max_width = 0.3);

/// Singleton rectangular family (degenerate boxes) drawn at random.
MeasureFamily random_point_family(const EventTree& tree, std::uint64_t seed, FamilyRole role);

}  // namespace fixtures
}  // namespace bubbletree
