#pragma once

#include <optional>
#include <vector>

#include "bubbletree/ambiguity.hpp"
#include "bubbletree/lattice.hpp"

namespace bubbletree {

struct ArbitrageCertificate {
    Strategy strategy;
    NodeId witness_leaf = 0;
    double witness_gain = 0.0;
    double total_gain = 0.0;
    std::vector<double> leaf_gains;  // leaf order, NaN on uncharged leaves
};

/// Maximizes the summed terminal gain over 0 <= pi <= 1 subject to G_T >= 0
/// on every leaf charged by `actual`. Returns a certificate when the optimum
/// exceeds 1e-6 and the strategy re-validates by direct evaluation.
std::optional<ArbitrageCertificate> find_arbitrage(const Market& market, const MeasureFamily& actual);

/// Direct re-check: pi >= 0, G_T >= -tol on charged leaves, witness gain > 1e-6.
bool certificate_valid(const Market& market, const MeasureFamily& actual,
                       const ArbitrageCertificate& cert, double tol = kDefaultTolerance);

struct FtapReport {
    std::optional<ArbitrageCertificate> arbitrage;
    bool certificate_valid = false;
    std::optional<MeasureFamily> family;     // explicit, one measure per LP that succeeded
    bool family_maximal = false;             // per-leaf search family only
    std::vector<NodeId> uncovered_leaves;    // charged leaves no supermartingale measure charges
    bool family_supermartingale = false;     // W is a G-supermartingale under `family`
    bool dichotomy_holds = false;            // exactly one of arbitrage / covering family
};

FtapReport verify_ftap(const Market& market, const MeasureFamily& actual,
                       double tol = kDefaultTolerance);

/// The largest rectangular family under which W is a one-step supermartingale,
/// restricted to leaves charged by `actual`. Vertices at each node are the
/// zero-drift edge points and the point masses on non-increasing children.
/// Throws Errc::arbitrage when no such measure exists at the root.
MeasureFamily risk_neutral_family(const Market& market, const MeasureFamily& actual);

struct HedgeSolution {
    double price = 0.0;
    Strategy strategy;
    std::vector<double> leaf_slack;  // x + G_T - payoff, NaN on uncharged leaves
};

/// min x s.t. x + sum pi dW >= payoff on charged leaves, pi >= 0.
/// Throws Errc::unbounded when the payoff can be hedged at any price.
HedgeSolution superhedge(const Market& market, const MeasureFamily& actual,
                         const std::vector<double>& leaf_payoff);

struct RobustPrice {
    double value = 0.0;         // upper expectation under the pricing family
    double hedge_price = 0.0;   // superhedge LP price
    double duality_gap = 0.0;
};

/// Throws Errc::not_risk_neutral unless W is a G-supermartingale under `pricing`.
RobustPrice robust_price(const Market& market, const MeasureFamily& pricing,
                         const MeasureFamily& actual, const std::vector<double>& leaf_payoff,
                         double tol = kDefaultTolerance);

}  // namespace bubbletree
